"""Writes golden_render.ppm from golden_scene.spec without using the library.

The scene generator, SplitMix64 stream and thermal colour table are
re-implemented here; only the colour table values are read from the header.
"""
import math
import pathlib
import re

HERE = pathlib.Path(__file__).resolve().parent
MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next() >> 11) * 2.0**-53

    def normal(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)


def load_spec(path):
    spec = {"blob": []}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "blob":
            spec["blob"].append(tuple(float(v) for v in value.split(",")))
        else:
            spec[key] = value
    return spec


def colour_table():
    header = (HERE.parent.parent / "include" / "thermorph" / "colormap.hpp").read_text()
    body = header[header.index("kThermalColormap"):]
    table = [tuple(int(v) for v in m) for m in re.findall(r"\{(\d+), (\d+), (\d+)\}", body)]
    assert len(table) == 256
    return table


def scene(spec):
    w, h = int(spec["width"]), int(spec["height"])
    bmin, bmax = float(spec["background_min"]), float(spec["background_max"])
    angle = float(spec["gradient_angle_deg"]) * math.pi / 180.0
    ux, uy = math.cos(angle), math.sin(angle)
    corners = [cx * ux + cy * uy for cx in (0.0, w - 1.0) for cy in (0.0, h - 1.0)]
    pmin, pmax = min(corners), max(corners)
    amp, period = float(spec["undulation_amplitude"]), float(spec["undulation_period"])
    rx, ry, rw, rh = (int(v) for v in spec["roi"].split(","))
    hot, shadow = float(spec["hot_band"]), float(spec["shadow"])
    sigma_n = float(spec["noise_sigma"])
    rng = SplitMix64(int(spec["seed"]))
    values, inside = [], []
    for y in range(h):
        for x in range(w):
            fx, fy = float(x), float(y)
            t = (fx * ux + fy * uy - pmin) / (pmax - pmin)
            v = bmin + (bmax - bmin) * t
            if amp != 0.0:
                k = 2.0 * math.pi / period
                v += amp * math.sin(k * fx) * math.cos(k * fy)
            in_roi = rx <= x < rx + rw and ry <= y < ry + rh
            if not in_roi:
                if x >= rx + rw:
                    v = hot
                elif y < ry:
                    v = shadow
            field = 0.0
            for cx, cy, rad, peak in spec["blob"]:
                d2 = (fx - cx) ** 2 + (fy - cy) ** 2
                if d2 <= rad * rad:
                    s = rad / 2.0
                    field += peak * math.exp(-d2 / (2.0 * s * s))
            values.append(v + field + sigma_n * rng.normal())
            inside.append(in_roi)
    return w, h, values, inside


def main():
    spec = load_spec(HERE / "golden_scene.spec")
    w, h, values, inside = scene(spec)
    table = colour_table()
    roi_values = [v for v, i in zip(values, inside) if i]
    lo, hi = min(roi_values), max(roi_values)
    out = bytearray(f"P6\n{w} {h}\n255\n".encode())
    for v, i in zip(values, inside):
        if not i:
            out += bytes((64, 64, 64))
            continue
        t = min(max((v - lo) / (hi - lo), 0.0), 1.0)
        idx = int(math.floor(t * 255.0 + 0.5))
        out += bytes(table[idx])
    (HERE / "golden_render.ppm").write_bytes(bytes(out))


if __name__ == "__main__":
    main()
