"""Smoke test for the deflamps Python module.

Build and install first:  maturin develop -m crates/py/Cargo.toml
"""

import math
import os
import random
import tempfile

import deflamps as dl


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    w, h = 32, 24
    target = dl.Raster(w, h, [0.1 + 0.8 * (x + y) / (w + h - 2) for y in range(h) for x in range(w)])
    assert (target.width, target.height) == (w, h)

    geom = dl.ViewingGeometry.for_print(110.0, 13.2, 64)
    assert close(geom.cm_to_px(0.4), 0.4 / (13.2 / 64))
    assert 0.20 <= dl.visual_angle_deg(0.4, 110.0) <= 0.21

    # integer shift by one pixel, periodic
    shift = dl.DisplacementField.uniform(w, h, geom.pixel_pitch_cm, 0.0)
    moved = dl.warp_image(target, shift, geom, boundary="periodic")
    assert close(moved.get(5, 3), target.get(4, 3))
    assert close(moved.mean(), target.mean())

    fields = [dl.sinusoidal_field(0.4, 1.0, k / 30.0, w, h) for k in range(30)]
    frames, reports = dl.build_projection_sequence(target, fields, geom)
    assert len(frames) == 30 and len(reports) == 30
    assert any(abs(v - 0.5) > 1e-3 for v in frames[0].data())
    assert all(r[0] == 0.0 for r in reports)

    picture = dl.ColorRaster.from_gray(target)
    perceived = dl.lambertian_composite(picture, frames[0], ambient=0.1)
    assert close(perceived.get(0, 0)[0], target.get(0, 0) * (0.1 + frames[0].get(0, 0)))

    movie = [dl.warp_color(picture, f, geom) for f in fields[:8]]
    static, dynamic = dl.decompose_movie(movie)
    r0 = static.plane(0).data()
    for t, frame in enumerate(movie):
        for i, v in enumerate(frame.plane(0).data()):
            assert close(r0[i] + dynamic[t][0][i], v)
    assert 0 <= dl.select_keyframe(movie) < 8

    noise = dl.noise_field_sequence(0.05, (1.0, 4.0), (0.0, 3.0), 7, 6, 10.0, 16, 16)
    rms = math.sqrt(sum(v * v for v in noise[0].dx() + noise[1].dx()) / (2 * 256))
    assert 0.0 < rms < 0.2

    rng = random.Random(3)
    levels, responses = [], []
    for level in (0.1, 0.2, 0.4, 0.8, 1.7, 3.3):
        p = 0.5 * (1 + math.erf((level - 0.4) / (0.15 * math.sqrt(2))))
        for _ in range(200):
            levels.append(level)
            responses.append(rng.random() < p)
    fit = dl.fit_cumulative_gaussian(levels, responses)
    assert abs(fit.mu - 0.4) < 0.05 and abs(fit.sigma - 0.15) < 0.05, fit
    assert close(fit.probability(fit.mu), 0.5)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "p.png")
        dl.write_color(path, perceived)
        back = dl.read_color(path)
        assert abs(back.get(3, 4)[1] - perceived.get(3, 4)[1]) <= 0.5 / 65535 + 1e-12
        fpath = os.path.join(d, "f.dlf")
        dl.save_fields(fpath, fields[:3])
        loaded = dl.load_fields(fpath)
        assert len(loaded) == 3
        assert all(abs(a - b) < 1e-6 for a, b in zip(loaded[2].dx(), fields[2].dx()))

    try:
        dl.Raster(2, 2, [0.0, 0.5, 1.5, 0.2])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range raster accepted")

    print("deflamps smoke test passed")


if __name__ == "__main__":
    main()
