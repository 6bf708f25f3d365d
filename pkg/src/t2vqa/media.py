"""Frame-sequence loading, colourspace conversion, and dataset manifests.

Videos are consumed as directories of still frames (PNG or binary PPM),
ordered by lexicographic filename sort; container demuxing is out of scope
and delegated to external tools such as ffmpeg.  All conversions are pure
functions of the pixel data.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from t2vqa.validation import check_rgb_frame

FRAME_EXTENSIONS = (".png", ".ppm")

# BT.601 luma weights, full range (the common default for 8-bit work).
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114

# High-precision linear sRGB -> CIEXYZ matrix.  The D65 white point is
# taken as the matrix row sums so that pure white maps to exactly
# L=100, a=b=0.
_SRGB_TO_XYZ = np.array(
    [
        [0.41239080, 0.35758434, 0.18048079],
        [0.21263901, 0.71516868, 0.07219232],
        [0.01933082, 0.11919478, 0.95053215],
    ]
)
_WHITE_POINT = _SRGB_TO_XYZ.sum(axis=1)


class MediaError(Exception):
    """Raised for unreadable frame directories, files, or manifests."""


class YuvLayout(enum.Enum):
    PLANAR = "planar"
    INTERLEAVED = "interleaved"


@dataclass(frozen=True)
class FrameSequence:
    """A decoded video: ordered RGB frames with uniform dimensions."""

    frames: tuple[np.ndarray, ...]
    width: int
    height: int
    source_id: str = ""

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("a FrameSequence needs at least one frame")
        for i, f in enumerate(self.frames):
            if f.shape != (self.height, self.width, 3):
                raise ValueError(
                    f"frame {i} has shape {f.shape}, expected "
                    f"({self.height}, {self.width}, 3)"
                )

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @classmethod
    def from_arrays(cls, frames, source_id: str = "") -> "FrameSequence":
        frames = tuple(check_rgb_frame(f, f"frame {i}") for i, f in enumerate(frames))
        if not frames:
            raise ValueError("a FrameSequence needs at least one frame")
        h, w = frames[0].shape[:2]
        return cls(frames=frames, width=w, height=h, source_id=source_id)


@dataclass(frozen=True)
class Yuv444Frame:
    """One 8-bit 4:4:4 YUV frame stored as a single byte buffer.

    ``data`` holds ``3 * width * height`` bytes: three concatenated planes
    (YYY..UUU..VVV) in planar layout, or per-pixel YUV triples in
    interleaved layout.
    """

    data: np.ndarray
    width: int
    height: int
    layout: YuvLayout

    def __post_init__(self):
        if self.data.ndim != 1 or self.data.dtype != np.uint8:
            raise ValueError("Yuv444Frame.data must be a flat uint8 buffer")
        if self.data.size != 3 * self.width * self.height:
            raise ValueError(
                f"buffer of {self.data.size} bytes does not match "
                f"3 x {self.width} x {self.height}"
            )

    def _plane(self, index: int) -> np.ndarray:
        n = self.width * self.height
        if self.layout is YuvLayout.PLANAR:
            plane = self.data[index * n:(index + 1) * n]
        else:
            plane = self.data[index::3]
        return plane.reshape(self.height, self.width)

    @property
    def y(self) -> np.ndarray:
        return self._plane(0)

    @property
    def u(self) -> np.ndarray:
        return self._plane(1)

    @property
    def v(self) -> np.ndarray:
        return self._plane(2)


@dataclass(frozen=True)
class ManifestEntry:
    video_id: str
    model_name: str
    prompt: str
    frames_path: str
    captions_path: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.video_id in seen:
                raise ValueError(f"duplicate video_id in manifest: {e.video_id!r}")
            if not e.prompt.strip():
                raise ValueError(f"empty prompt for video_id {e.video_id!r}")
            seen.add(e.video_id)


def load_frames(path: str | Path, source_id: str | None = None) -> FrameSequence:
    """Decode a directory of image files into a :class:`FrameSequence`.

    Frames are the regular files with a ``.png`` or ``.ppm`` suffix, taken
    in lexicographic filename order.  Every frame must decode and share the
    dimensions of the first one.

    Raises
    ------
    MediaError
        If the directory is missing or holds no frames, a file cannot be
        decoded, or dimensions are mixed.  The message names the offending
        file.
    """
    root = Path(path)
    if not root.is_dir():
        raise MediaError(f"frame directory not found: {root}")
    names = sorted(
        p.name for p in root.iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_EXTENSIONS
    )
    if not names:
        raise MediaError(f"no frames in {root} (expected *.png or *.ppm files)")

    frames = []
    width = height = None
    for name in names:
        try:
            with Image.open(root / name) as im:
                rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError) as exc:
            raise MediaError(f"cannot decode frame {name!r} in {root}: {exc}") from exc
        h, w = rgb.shape[:2]
        if width is None:
            width, height = w, h
        elif (w, h) != (width, height):
            raise MediaError(
                f"frame {name!r} is {w}x{h} but earlier frames are {width}x{height}"
            )
        frames.append(rgb)
    return FrameSequence(
        frames=tuple(frames),
        width=width,
        height=height,
        source_id=source_id if source_id is not None else root.name,
    )


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma: ``round(0.299 R + 0.587 G + 0.114 B)`` as uint8.

    Rounding is half-up so results do not depend on numpy's
    round-half-even behaviour.
    """
    rgb = check_rgb_frame(frame).astype(np.float64)
    luma = _LUMA_R * rgb[..., 0] + _LUMA_G * rgb[..., 1] + _LUMA_B * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def rgb_to_lab(frame: np.ndarray) -> np.ndarray:
    """Convert an 8-bit sRGB frame to CIELAB (D65), returning float64 ``(H, W, 3)``."""
    rgb = check_rgb_frame(frame).astype(np.float64) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _WHITE_POINT
    delta = 6.0 / 29.0
    f = np.where(t > delta ** 3, np.cbrt(t), t / (3 * delta ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def rgb_to_yuv444(frame: np.ndarray, layout: YuvLayout = YuvLayout.PLANAR) -> Yuv444Frame:
    """Convert RGB to 8-bit full-range BT.601 YUV 4:4:4 in the given layout.

    Chroma channels are offset by 128 so a neutral frame maps to
    Y=U=V=128 for mid gray and (0, 128, 128) for black.
    """
    rgb = check_rgb_frame(frame).astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    u = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    v = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    planes = [np.clip(np.floor(p + 0.5), 0, 255).astype(np.uint8) for p in (y, u, v)]
    h, w = rgb.shape[:2]
    if layout is YuvLayout.PLANAR:
        data = np.concatenate([p.ravel() for p in planes])
    else:
        data = np.stack(planes, axis=-1).ravel()
    return Yuv444Frame(data=data, width=w, height=h, layout=layout)


def yuv444_to_rgb(frame: Yuv444Frame) -> np.ndarray:
    """Inverse of :func:`rgb_to_yuv444`; exact to within +/-1 per channel."""
    y = frame.y.astype(np.float64)
    u = frame.u.astype(np.float64) - 128.0
    v = frame.v.astype(np.float64) - 128.0
    r = y + 1.402 * v
    g = y - 0.344136 * u - 0.714136 * v
    b = y + 1.772 * u
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def planar_to_interleaved(frame: Yuv444Frame) -> Yuv444Frame:
    """Reorder a planar byte stream YYY..UUU..VVV into YUVYUV.. triples."""
    if frame.layout is not YuvLayout.PLANAR:
        raise ValueError(f"expected planar input, got layout {frame.layout.value!r}")
    n = frame.width * frame.height
    data = frame.data.reshape(3, n).T.reshape(-1).copy()
    return Yuv444Frame(data=data, width=frame.width, height=frame.height,
                       layout=YuvLayout.INTERLEAVED)


def interleaved_to_planar(frame: Yuv444Frame) -> Yuv444Frame:
    """Inverse reordering of :func:`planar_to_interleaved`."""
    if frame.layout is not YuvLayout.INTERLEAVED:
        raise ValueError(f"expected interleaved input, got layout {frame.layout.value!r}")
    n = frame.width * frame.height
    data = frame.data.reshape(n, 3).T.reshape(-1).copy()
    return Yuv444Frame(data=data, width=frame.width, height=frame.height,
                       layout=YuvLayout.PLANAR)


MANIFEST_COLUMNS = ("video_id", "model_name", "prompt", "frames_path", "captions_path")


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read a dataset manifest CSV.

    The file must carry the header
    ``video_id,model_name,prompt,frames_path,captions_path``; the
    ``captions_path`` cell may be empty.  Relative paths are resolved
    against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise MediaError(f"manifest not found: {path}")
    base = path.parent
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in MANIFEST_COLUMNS[:4] if c not in (reader.fieldnames or [])]
        if missing:
            raise MediaError(f"manifest {path} is missing columns: {', '.join(missing)}")
        for i, row in enumerate(reader):
            captions = (row.get("captions_path") or "").strip()
            entries.append(ManifestEntry(
                video_id=row["video_id"].strip(),
                model_name=row["model_name"].strip(),
                prompt=row["prompt"],
                frames_path=str(base / row["frames_path"]) if row["frames_path"] else "",
                captions_path=str(base / captions) if captions else None,
            ))
            if not entries[-1].video_id:
                raise MediaError(f"manifest row {i + 2}: empty video_id")
    try:
        return DatasetManifest(entries=tuple(entries))
    except ValueError as exc:
        raise MediaError(f"manifest {path}: {exc}") from exc
