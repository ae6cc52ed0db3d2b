"""Independent decode of the QF95 test raster.

The C++ test writes the raster below through the project's JPEG encoder; this
script decodes that file with Pillow and prints the per-pixel maximum absolute
deviation and the summed absolute deviation from the original, the values
frozen in test_imaging.cpp.

usage: python3 jpeg_reference.py <file.jpg>
"""
import sys

from PIL import Image

W, H = 48, 40


def raster(x, y):
    return ((x * 7 + y * 3) % 256, (x * y) % 256, ((x ^ y) * 5) % 256)


def main(path):
    img = Image.open(path).convert("RGB")
    assert img.size == (W, H), img.size
    px = img.load()
    worst = 0
    total = 0
    for y in range(H):
        for x in range(W):
            for a, b in zip(px[x, y], raster(x, y)):
                worst = max(worst, abs(a - b))
                total += abs(a - b)
    print(worst, total)


if __name__ == "__main__":
    main(sys.argv[1])
