"""Import the compiled module and check a few closed-form anchors."""

import math

import polaritonix as px


def main() -> None:
    print("polaritonix", px.__version__)

    omega = [i / 100 for i in range(-300, 301)]
    t = px.transmission(16, 0.25, 0.01, 0.0, 1.0, omega)
    mag = [abs(z) for z in t]
    peaks = [omega[i] for i in range(1, len(mag) - 1) if mag[i - 1] < mag[i] >= mag[i + 1]]
    assert len(peaks) == 2 and all(abs(abs(p) - 1.0) <= 0.01 for p in peaks), peaks

    shift, rate = px.dark_shift_and_rate([-0.5, 0.1, 0.4, 0.9], 0.01)
    assert rate > 0.0 and math.isfinite(shift)

    assert px.vrs(16, 0.25, 0.01, 0.0, 1.0) > 1.0
    assert px.vrs_theory(1.0, 0.01, 1.0, 0.0) > 0.0

    forward = px.fret_rate(0.6, 0.5, 0.5, 0.5, 0.05)
    backward = px.fret_rate(0.6, -0.5, 0.5, 0.5, 0.05)
    assert forward > 10 * backward, (forward, backward)

    eigs = px.donor_eigs(16, 0.25, 0.01, 1.0, 0.01)
    assert len(eigs) == 3 and all(e.real < 0 for e in eigs)

    try:
        px.dark_shift_and_rate([0.0, 1.0], -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative gamma accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
