"""Captioned outfit datasets.

Two sources: the real fashion corpus (loaded from a documented on-disk
layout) and a procedural sprite dataset with ground-truth attributes
and garment masks, used for desk-scale training and for oracles.
"""

import colorsys
import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .errors import DataLayoutError, ValidationError
from .imaging import load_image, save_image, to_tensor

GENDERS = ("lady", "man")
SLEEVES = ("sleeveless", "short-sleeved", "long-sleeved")
CATEGORIES = ("blouse", "t-shirt", "dress", "romper")

# Eight garment colors at 45 degree hue spacing, so color edits are
# separable by hue histograms.
COLOR_HUES = {
    "red": 0.0,
    "orange": 45.0,
    "lime": 90.0,
    "green": 135.0,
    "cyan": 180.0,
    "blue": 225.0,
    "purple": 270.0,
    "pink": 315.0,
}
COLORS = tuple(COLOR_HUES)
GARMENT_RGB = {
    name: tuple(
        int(round(255 * c))
        for c in colorsys.hsv_to_rgb(hue / 360.0, 0.85, 0.88)
    )
    for name, hue in COLOR_HUES.items()
}

_BG_BASES = ((201, 203, 207), (196, 199, 189), (207, 200, 190), (188, 193, 203))
_SKIN = ((243, 211, 183), (224, 186, 150), (198, 155, 118))
_HAIR = ((40, 34, 30), (85, 58, 38), (120, 96, 60), (25, 25, 28))


@dataclass(frozen=True)
class Attributes:
    gender: str
    sleeve: str
    color: str
    category: str

    def as_dict(self) -> dict:
        return {
            "gender": self.gender,
            "sleeve": self.sleeve,
            "color": self.color,
            "category": self.category,
        }


ALL_ATTRIBUTES = tuple(
    Attributes(g, s, c, k)
    for g in GENDERS
    for s in SLEEVES
    for c in COLORS
    for k in CATEGORIES
)

ATTRIBUTE_VALUES = {
    "gender": GENDERS,
    "sleeve": SLEEVES,
    "color": COLORS,
    "category": CATEGORIES,
}


def caption_of(attrs: Attributes) -> str:
    """Render attributes as 'the {gender} is wearing a {color} {sleeve} {category}'."""
    for slot, values in ATTRIBUTE_VALUES.items():
        if getattr(attrs, slot) not in values:
            raise ValidationError(f"unknown {slot} value {getattr(attrs, slot)!r}")
    return (
        f"the {attrs.gender} is wearing a {attrs.color} "
        f"{attrs.sleeve} {attrs.category}"
    )


_CAPTION_RE = re.compile(
    r"^the (lady|man) is wearing an? (%s) (%s) (%s)$"
    % ("|".join(COLORS), "|".join(SLEEVES), "|".join(CATEGORIES))
)


def parse_caption(text: str) -> Attributes:
    """Inverse of caption_of; the grammar is bijective on the attribute product."""
    m = _CAPTION_RE.match(text.strip().lower())
    if m is None:
        raise ValidationError(f"caption does not match the grammar: {text!r}")
    return Attributes(m.group(1), m.group(3), m.group(2), m.group(4))


@dataclass
class CaptionedSample:
    image: torch.Tensor  # (3, H, W) in [-1, 1]
    caption: str
    attributes: Attributes
    mask: torch.Tensor | None = None  # (H, W) bool, editable garment region


@dataclass
class DatasetSplit:
    train: list
    test: list
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BodyParams:
    """Everything about a sprite that is not the garment."""

    bg: int
    stripe_period: float  # fraction of height
    stripe_phase: float
    skin: int
    hair: int
    dx: float  # horizontal figure shift, fraction of width


def sample_body(rng: np.random.Generator) -> BodyParams:
    return BodyParams(
        bg=int(rng.integers(len(_BG_BASES))),
        stripe_period=float(rng.uniform(0.06, 0.14)),
        stripe_phase=float(rng.uniform(0.0, 1.0)),
        skin=int(rng.integers(len(_SKIN))),
        hair=int(rng.integers(len(_HAIR))),
        dx=float(rng.uniform(-0.03, 0.03)),
    )


def _torso_half_width(gender: str, ry: np.ndarray, w: int) -> np.ndarray:
    # Gender-coded silhouette: broad straight torso vs tapered waist.
    if gender == "man":
        return np.interp(ry, [0.22, 0.45, 0.55], [0.24, 0.23, 0.23]) * w
    return np.interp(ry, [0.22, 0.45, 0.55], [0.21, 0.17, 0.22]) * w


def _garment_region(gender, category, H, W, cx, yy, xx, ry):
    torso_hw = _torso_half_width(gender, ry, W)
    if category == "t-shirt":
        hem, flare = 0.50, 1.02
        hw = torso_hw * flare
    elif category == "blouse":
        hem = 0.58
        hw = torso_hw * np.interp(ry, [0.22, hem], [1.05, 1.18])
    elif category == "dress":
        hem = 0.86
        # torso-width bodice flaring linearly to a wide skirt at the hem
        t = np.clip((ry - 0.42) / (hem - 0.42), 0.0, 1.0)
        hw = (1.0 - t) * torso_hw + t * 0.42 * W
    else:  # romper
        hem = 0.54
        hw = torso_hw * 1.05
    region = (np.abs(xx - cx) <= hw) & (ry >= 0.22) & (ry <= hem)
    if category == "romper":
        leg_hw = 0.065 * W
        leg_off = 0.10 * W
        legs = (
            (ry > hem)
            & (ry <= 0.72)
            & (
                (np.abs(xx - (cx - leg_off)) <= leg_hw)
                | (np.abs(xx - (cx + leg_off)) <= leg_hw)
            )
        )
        region = region | legs
    return region


def _arm_regions(H, W, cx, yy, xx, ry, gender):
    shoulder_hw = float(_torso_half_width(gender, np.array([0.23]), W)[0])
    arm_hw = 0.035 * W
    off = shoulder_hw + arm_hw + 0.005 * W
    band = (ry >= 0.23) & (ry <= 0.56)
    left = band & (np.abs(xx - (cx - off)) <= arm_hw)
    right = band & (np.abs(xx - (cx + off)) <= arm_hw)
    return left | right


def render_sprite(body: BodyParams, attrs: Attributes, resolution=(128, 64)):
    """Draws one sprite. Returns (uint8 (H, W, 3) image, bool (H, W) mask).

    The mask is the union of every garment silhouette this body could
    wear (all categories, longest sleeves), so pixels outside it are
    identical across sprites that differ only in garment attributes.
    """
    H, W = resolution
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    ry = yy / H
    cx = (0.5 + body.dx) * W

    img = np.empty((H, W, 3), dtype=np.float64)
    base = np.array(_BG_BASES[body.bg], dtype=np.float64)
    stripe = np.clip(base - 12.0, 0, 255)
    phase = ((ry + body.stripe_phase) / body.stripe_period).astype(np.int64) % 2
    img[:] = base
    img[phase == 1] = stripe

    skin = np.array(_SKIN[body.skin], dtype=np.float64)
    hair = np.array(_HAIR[body.hair], dtype=np.float64)

    head_c = (0.13 * H, cx)
    r = 0.055 * H
    dist = np.sqrt((yy - head_c[0]) ** 2 + (xx - head_c[1]) ** 2)
    if attrs.gender == "lady":
        hair_region = (
            (np.abs(xx - cx) <= 1.5 * r)
            & (yy >= head_c[0] - 1.3 * r)
            & (ry <= 0.32)
        )
    else:
        hair_region = (dist <= 1.15 * r) & (yy <= head_c[0] - 0.15 * r)
    img[hair_region] = hair
    img[dist <= r] = skin

    neck = (np.abs(xx - cx) <= 0.035 * W) & (ry >= 0.17) & (ry <= 0.23)
    img[neck] = skin

    torso_hw = _torso_half_width(attrs.gender, ry, W)
    torso = (np.abs(xx - cx) <= torso_hw) & (ry >= 0.22) & (ry <= 0.56)
    img[torso] = skin

    arms = _arm_regions(H, W, cx, yy, xx, ry, attrs.gender)
    img[arms] = skin

    leg_hw = 0.045 * W
    leg_off = 0.09 * W
    legs = (
        (ry > 0.52)
        & (ry <= 0.95)
        & (
            (np.abs(xx - (cx - leg_off)) <= leg_hw)
            | (np.abs(xx - (cx + leg_off)) <= leg_hw)
        )
    )
    img[legs] = skin

    # Editable region: union over all garment geometries for this body.
    mask = np.zeros((H, W), dtype=bool)
    for cat in CATEGORIES:
        mask |= _garment_region(attrs.gender, cat, H, W, cx, yy, xx, ry)
    mask |= arms

    garment = _garment_region(attrs.gender, attrs.category, H, W, cx, yy, xx, ry)
    color = np.array(GARMENT_RGB[attrs.color], dtype=np.float64)
    img[garment] = color
    if attrs.sleeve != "sleeveless":
        cover = 0.36 if attrs.sleeve == "short-sleeved" else 0.56
        sleeves = arms & (ry <= cover)
        img[sleeves] = color

    return img.astype(np.uint8), mask


def generate_synthetic(n: int, seed: int, resolution=(128, 64)) -> DatasetSplit:
    """n captioned sprites, 90/10 train/test, fully determined by seed."""
    if n < 10:
        raise ValidationError(f"need at least 10 samples, got {n}")
    rng = np.random.default_rng(seed)
    combos = list(ALL_ATTRIBUTES)
    attrs_list = [combos[i % len(combos)] for i in range(n)]
    order = rng.permutation(n)

    samples = []
    for i in range(n):
        attrs = attrs_list[order[i]]
        body = sample_body(rng)
        img, mask = render_sprite(body, attrs, resolution)
        samples.append(
            CaptionedSample(
                image=to_tensor(img),
                caption=caption_of(attrs),
                attributes=attrs,
                mask=torch.from_numpy(mask),
            )
        )
    n_train = int(round(0.9 * n))
    return DatasetSplit(
        train=samples[:n_train],
        test=samples[n_train:],
        meta={"seed": seed, "n": n, "resolution": list(resolution)},
    )


def save_synthetic(split: DatasetSplit, out_dir) -> None:
    """Persists images/NNNNN.png, masks/NNNNN.png, labels.csv, manifest.json.

    Sample order is train followed by test; the split boundary is the
    deterministic 90/10 rule, so it is recoverable from the manifest.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    rows = []
    for i, s in enumerate(split.train + split.test):
        save_image(s.image, out / "images" / f"{i:05d}.png")
        mask8 = (s.mask.numpy().astype(np.uint8)) * 255
        Image.fromarray(mask8, mode="L").save(out / "masks" / f"{i:05d}.png")
        a = s.attributes
        rows.append([i, s.caption, a.gender, a.sleeve, a.color, a.category])
    with open(out / "labels.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "caption", "gender", "sleeve", "color", "category"])
        w.writerows(rows)
    with open(out / "manifest.json", "w") as f:
        json.dump(split.meta, f, indent=2)


def load_synthetic(dataset_dir) -> DatasetSplit:
    root = Path(dataset_dir)
    manifest_path = root / "manifest.json"
    labels_path = root / "labels.csv"
    if not manifest_path.is_file() or not labels_path.is_file():
        raise DataLayoutError(
            f"{root} is not a synthetic dataset directory; expected "
            "images/NNNNN.png, masks/NNNNN.png, labels.csv, manifest.json"
        )
    with open(manifest_path) as f:
        meta = json.load(f)
    resolution = tuple(meta["resolution"])
    samples = []
    with open(labels_path, newline="") as f:
        for row in csv.DictReader(f):
            i = int(row["id"])
            img = load_image(root / "images" / f"{i:05d}.png")
            mask = np.asarray(Image.open(root / "masks" / f"{i:05d}.png")) > 127
            samples.append(
                CaptionedSample(
                    image=img,
                    caption=row["caption"],
                    attributes=Attributes(
                        row["gender"], row["sleeve"], row["color"], row["category"]
                    ),
                    mask=torch.from_numpy(mask),
                )
            )
    n = meta["n"]
    if len(samples) != n:
        raise DataLayoutError(f"manifest says n={n} but labels.csv has {len(samples)} rows")
    n_train = int(round(0.9 * n))
    return DatasetSplit(
        train=samples[:n_train], test=samples[n_train:],
        meta={**meta, "resolution": resolution},
    )


FASHION_LAYOUT = """\
images.npy       uint8 array of shape (N, H, W, 3)
captions.txt     N lines, one caption per image
attributes.csv   header gender,sleeve,color,category then N rows
split.json       {"train": [indices], "test": [indices]}
"""


def load_fashion_synthesis(dataset_dir, resolution=(128, 64)) -> DatasetSplit:
    """Loads the real captioned-outfit corpus from a directory.

    Expected layout::

        images.npy       uint8 array of shape (N, H, W, 3)
        captions.txt     N lines, one caption per image
        attributes.csv   header gender,sleeve,color,category then N rows
        split.json       {"train": [indices], "test": [indices]}

    Images are resized to the configured resolution and scaled to
    [-1, 1]. Segmentation maps, if present in the directory, are
    ignored. Attribute values are kept verbatim (the real label set is
    larger than the synthetic one).
    """
    root = Path(dataset_dir)
    missing = [
        name
        for name in ("images.npy", "captions.txt", "attributes.csv", "split.json")
        if not (root / name).is_file()
    ]
    if missing:
        raise DataLayoutError(
            f"{root} is missing {', '.join(missing)}; expected layout:\n{FASHION_LAYOUT}"
        )
    images = np.load(root / "images.npy")
    captions = (root / "captions.txt").read_text().splitlines()
    with open(root / "attributes.csv", newline="") as f:
        attr_rows = list(csv.DictReader(f))
    with open(root / "split.json") as f:
        split_idx = json.load(f)
    if not (len(images) == len(captions) == len(attr_rows)):
        raise DataLayoutError(
            f"inconsistent counts: {len(images)} images, {len(captions)} captions, "
            f"{len(attr_rows)} attribute rows"
        )

    def build(i: int) -> CaptionedSample:
        arr = images[i]
        if arr.shape[:2] != tuple(resolution):
            img = Image.fromarray(arr).resize(
                (resolution[1], resolution[0]), Image.BILINEAR
            )
            arr = np.asarray(img)
        row = attr_rows[i]
        return CaptionedSample(
            image=to_tensor(arr),
            caption=captions[i],
            attributes=Attributes(
                row["gender"], row["sleeve"], row["color"], row["category"]
            ),
        )

    return DatasetSplit(
        train=[build(i) for i in split_idx["train"]],
        test=[build(i) for i in split_idx["test"]],
        meta={"resolution": tuple(resolution), "n": len(images)},
    )


def load_dataset(dataset_dir) -> DatasetSplit:
    """Dispatch on layout: synthetic directory or real corpus directory."""
    root = Path(dataset_dir)
    if (root / "manifest.json").is_file():
        return load_synthetic(root)
    return load_fashion_synthesis(root)


def stack_images(samples) -> torch.Tensor:
    return torch.stack([s.image for s in samples])
