"""Smoke test for the `mbk` extension module."""

import math

import mbk


def main() -> None:
    hartogs = mbk.Domain("hartogs:1")
    assert hartogs.dim == 2
    assert mbk.enumerate_sp(hartogs, "2", "-3:0,-3:0") == [[0, -1], [0, 0]]

    omega = mbk.Domain("omega_a:1,1,1,2")
    assert mbk.thresholds(omega) == ["6/1", "4/1", "3/1", "2/1", "3/2", "4/3", "6/5"]
    assert mbk.thresholds(mbk.Domain("hartogs:sqrt(2)")) is None

    closed = mbk.norm(omega, [0, 0], "2")
    assert abs(closed - math.pi**2 / 6) < 1e-14
    assert abs(mbk.quadrature_norm(omega, [0, 0], 2.0) - closed) < 1e-6 * closed
    assert math.isinf(mbk.norm(hartogs, [0, -2], "2"))

    disc_value = mbk.kernel(mbk.Domain("disc"), "2", [0.5], [0.5])
    assert abs(disc_value - 16 / (9 * math.pi)) < 1e-8
    bidisc = mbk.Domain("product(disc,disc)")
    assert abs(mbk.kernel(bidisc, "2", [0.5, 0.5], [0.5, 0.5]) - (16 / (9 * math.pi)) ** 2) < 1e-8

    assert mbk.twist([2 + 0j, 0j], 3.0) == [4 + 0j, 0j]
    assert hartogs.contains([0.1, 0.5]) == "inside"

    passed, _ = mbk.verify("union-law", 1)
    assert passed

    try:
        mbk.Domain("omega_a:2,2,1,2")
    except ValueError as err:
        assert "gcd" in str(err)
    else:
        raise AssertionError("invalid domain accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
