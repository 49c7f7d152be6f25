#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the offline test corpus under tests/fixtures.

Images and masks are drawn with Pillow. Replay fixtures are named with a
request hash computed here, independently of the C++ implementation, so the
test suite can check the two agree.
"""

import hashlib
import json
import pathlib

from PIL import Image, ImageDraw

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent.parent
PROMPTS = ROOT / "prompts"
IMAGES = HERE / "images"
MASKS = HERE / "masks"
REPLAY = HERE / "replay"

IMPLICIT_QUERY = "What is the camouflaged object in the image that can move like an animal? Please segment it."


def prompt(name):
    return (PROMPTS / name).read_bytes()


def canonical(system, parts, temperature=0.5, max_tokens=2000):
    out = bytearray(b"thinkfirst-mllm-request/v1\n")
    out += b"temperature:%.6f\n" % temperature
    out += b"max_output_tokens:%d\n" % max_tokens
    out += b"system:%d:" % len(system) + system + b"\n"
    for kind, payload in parts:
        if kind == "text":
            out += b"text:%d:" % len(payload) + payload + b"\n"
        else:
            out += b"image:png:%d:" % len(payload) + payload + b"\n"
    return bytes(out)


def request_hash(system, parts):
    return hashlib.sha256(canonical(system, parts)).hexdigest()


def cot_hash(image_bytes, env, task):
    return request_hash(prompt("system_context.txt"),
                        [("text", prompt(env)), ("text", task), ("image", image_bytes)])


def describe_hash(image_bytes):
    return request_hash(prompt("system_context.txt"),
                        [("text", prompt("task_standard.txt")), ("image", image_bytes)])


def save_png(img, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    img.save(path, format="PNG", optimize=False, compress_level=9)
    return path.read_bytes()


def mask_image(w, h, rows):
    m = Image.new("L", (w, h), 0)
    for y in rows:
        for x in range(w):
            m.putpixel((x, y), 255)
    return m


def scene(seed, w=4, h=4):
    img = Image.new("RGB", (w, h))
    for y in range(h):
        for x in range(w):
            img.putpixel((x, y), ((seed * 53 + x * 31) % 256, (seed * 97 + y * 17) % 256, (seed * 11 + x * y) % 256))
    return img


def flatfish_image():
    img = Image.new("RGB", (48, 32), (194, 178, 128))
    d = ImageDraw.Draw(img)
    for i in range(0, 48, 5):
        d.point((i, (i * 7) % 32), fill=(160, 140, 100))
    d.ellipse((26, 12, 42, 22), fill=(170, 150, 105))
    d.ellipse((8, 18, 12, 22), fill=(230, 225, 210))
    return img


def chair_image():
    img = Image.new("RGB", (64, 64), (245, 245, 245))
    d = ImageDraw.Draw(img)
    d.rounded_rectangle((14, 6, 44, 36), radius=8, fill=(235, 120, 30))
    d.rectangle((14, 34, 50, 42), fill=(225, 110, 25))
    d.rectangle((18, 42, 22, 60), fill=(200, 95, 20))
    d.rectangle((42, 42, 46, 60), fill=(200, 95, 20))
    return img


def waldo_image(seed):
    img = Image.new("RGB", (40, 40), (90, 160, 80))
    d = ImageDraw.Draw(img)
    for i in range(12):
        x, y = (i * 13 + seed) % 36, (i * 7 + seed * 3) % 36
        d.rectangle((x, y, x + 3, y + 3), fill=((i * 40) % 256, 80, (i * 90) % 256))
    for k in range(4):
        d.line((20, 22 + k, 23, 22 + k), fill=(220, 30, 30) if k % 2 == 0 else (250, 250, 250))
    d.polygon([(30, 30), (38, 30), (34, 24)], fill=(200, 200, 60))
    return img


def write_fixture(key, text):
    REPLAY.mkdir(parents=True, exist_ok=True)
    (REPLAY / (key + ".txt")).write_text(text, encoding="utf-8")


def main():
    transcripts = HERE / "transcripts"
    task_camo = prompt("task_camouflage.txt")
    keys = {}

    # flatfish: full CoT and describe-only replies
    flat = save_png(flatfish_image(), IMAGES / "flatfish.png")
    keys["flatfish_camouflage"] = cot_hash(flat, "env_standard.txt", task_camo)
    write_fixture(keys["flatfish_camouflage"], (transcripts / "flatfish.txt").read_text(encoding="utf-8"))
    keys["flatfish_standard"] = cot_hash(flat, "env_standard.txt", prompt("task_standard.txt"))
    write_fixture(keys["flatfish_standard"], (transcripts / "flatfish.txt").read_text(encoding="utf-8"))
    keys["flatfish_describe"] = describe_hash(flat)
    write_fixture(keys["flatfish_describe"],
                  "The image shows a sandy seabed with pebbles and a small white shell on the left. "
                  "Towards the right there is a slightly darker oval patch of sand.\n")

    save_png(chair_image(), IMAGES / "chair.png")
    chair_image().save(IMAGES / "chair.jpg", format="JPEG", quality=90)

    # Waldo: one well-formed prompt, one that breaks the required opening
    good = save_png(waldo_image(1), IMAGES / "waldo.png")
    keys["waldo"] = cot_hash(good, "env_waldo.txt", prompt("task_waldo.txt"))
    write_fixture(keys["waldo"],
                  "- What is the overall scene?: A crowded campsite seen from above with many people and tents.\n"
                  "- Where is Waldo?: Slightly below the center, next to a yellow tent.\n"
                  "- What is Waldo wearing?: A red and white striped shirt.\n"
                  "- Summary: Waldo stands just below the center of the crowded campsite beside a yellow tent, "
                  "wearing his red and white striped shirt.\n"
                  "- Prompt: Please segment the boy in the red and white striped shirt near the tent.\n")
    bad = save_png(waldo_image(2), IMAGES / "waldo_bad.png")
    keys["waldo_bad"] = cot_hash(bad, "env_waldo.txt", prompt("task_waldo.txt"))
    write_fixture(keys["waldo_bad"],
                  "- What is the overall scene?: A busy beach.\n"
                  "- Where is Waldo?: Near the top left.\n"
                  "- Summary: Waldo is near the top left of the beach.\n"
                  "- Prompt: Segment Waldo.\n")

    # synthetic 3-sample manifest: a hit, a half overlap (I=4, U=12) and a miss
    samples = [
        ("hit", scene(1), [0, 1],
         "- What is the setting?: A sandy seabed.\n- What is hidden?: A flatfish lying flat.\n"
         "- Summary: A flatfish lies flat on the sandy seabed.\n"),
        ("half", scene(2), [1, 2],
         "- What is the setting?: Sand and pebbles.\n- What is hidden?: A small flatfish.\n"
         "- Summary: A small flatfish is buried in the sand among pebbles.\n"),
        ("miss", scene(3), [2, 3],
         "- What is the setting?: A rocky reef.\n- What is hidden?: An octopus.\n"
         "- Summary: An octopus hides against the rocky reef.\n"),
    ]
    rows = ["#thinkfirst-manifest v1"]
    for sid, img, gt_rows, transcript in samples:
        data = save_png(img, IMAGES / f"synthetic_{sid}.png")
        save_png(mask_image(4, 4, gt_rows), MASKS / f"synthetic_{sid}.png")
        keys[f"synthetic_{sid}"] = cot_hash(data, "env_standard.txt", task_camo)
        write_fixture(keys[f"synthetic_{sid}"], transcript)
        rows.append(f"{sid}\timages/synthetic_{sid}.png\tmasks/synthetic_{sid}.png\t-\ttest")
    (HERE / "synthetic.manifest").write_text("\n".join(rows) + "\n", encoding="utf-8")

    config = {
        "mllm": "replay",
        "segmenter": "keyword-mock",
        "fixture_dir": "replay",
        "keyword_rules": [
            {"triggers": ["flatfish"], "box": [0, 0, 3, 1]},
            {"triggers": ["backrest"], "box": [14, 6, 30, 20]},
            {"triggers": ["striped shirt", "tent"], "box": [18, 20, 25, 27]},
        ],
    }
    (HERE / "offline.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    (HERE / "request_hashes.json").write_text(json.dumps(keys, indent=2, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
