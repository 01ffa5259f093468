"""Writes GPS-tagged JPEG and PNG fixtures plus a sidecar with the exact
rationals, for the EXIF integration tests."""

import json
import pathlib
from fractions import Fraction

from PIL import Image
from PIL.TiffImagePlugin import IFDRational

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/exif"

CASES = [
    {
        "file": "paris.jpg",
        "lat": [[48, 1], [51, 1], [2952, 100]],
        "lat_ref": "N",
        "lon": [[2, 1], [17, 1], [402, 10]],
        "lon_ref": "E",
        "make": "FixtureCam",
        "model": "FC-100",
        "software": "darktable 4.6",
        "datetime": "2023:05:14 10:22:31",
    },
    {
        "file": "santiago.png",
        "lat": [[33, 1], [26, 1], [5893, 1000]],
        "lat_ref": "S",
        "lon": [[70, 1], [39, 1], [1111, 100]],
        "lon_ref": "W",
        "make": "PhoneCo",
        "model": "P7",
        "software": None,
        "datetime": "2022:11:02 18:00:05",
    },
    {
        "file": "nogps.jpg",
        "lat": None,
        "make": "FixtureCam",
        "model": "FC-200",
        "software": None,
        "datetime": None,
    },
]


def build(case):
    img = Image.new("RGB", (8, 8), (120, 30, 200))
    exif = Image.Exif()
    exif[0x010F] = case["make"]
    exif[0x0110] = case["model"]
    if case["software"]:
        exif[0x0131] = case["software"]
    if case["datetime"]:
        exif[0x0132] = case["datetime"]
    if case["lat"]:
        gps = exif.get_ifd(0x8825)
        gps[0] = b"\x02\x03\x00\x00"
        gps[1] = case["lat_ref"]
        gps[2] = tuple(IFDRational(n, d) for n, d in case["lat"])
        gps[3] = case["lon_ref"]
        gps[4] = tuple(IFDRational(n, d) for n, d in case["lon"])
    path = OUT / case["file"]
    fmt = "PNG" if path.suffix == ".png" else "JPEG"
    img.save(path, fmt, exif=exif.tobytes())


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    sidecar = []
    for case in CASES:
        build(case)
        entry = {k: case[k] for k in ("file", "make", "model", "software", "datetime")}
        if case["lat"]:
            entry.update({k: case[k] for k in ("lat", "lat_ref", "lon", "lon_ref")})
            # Reference values as exact fractions rendered to 12 places.
            for key in ("lat", "lon"):
                exact = sum(Fraction(n, d) / Fraction(60) ** i for i, (n, d) in enumerate(case[key]))
                entry[f"{key}_exact"] = f"{float(exact):.12f}"
        sidecar.append(entry)
    (OUT / "expected.json").write_text(json.dumps(sidecar, indent=2) + "\n")


if __name__ == "__main__":
    main()
