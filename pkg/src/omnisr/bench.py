"""Benchmark harness: degrade a directory of ERP images, reconstruct, score, report.

Per-image work is independent, so images can be spread over a process pool;
results are always collected in manifest order and every reduction is
exactly rounded, so reports are byte-identical for any worker count.
"""

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import metrics, raster
from .erp import ViewportSpec, row_weights
from .imageio import is_supported, load_image, save_image

log = logging.getLogger(__name__)

METRICS = ("psnr_db", "ssim", "ws_psnr_db", "ws_ssim")
CSV_HEADER = ("id",) + METRICS
METHODS = ("nn", "bicubic", "external")
PLANES = ("luma", "rgb-mean")


class EmptyManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    width: int
    height: int


def scan_dataset(directory):
    """List supported images in ``directory`` in lexicographic filename order.

    Files that fail to decode are skipped with a warning.
    """
    directory = os.fspath(directory)
    names = sorted(os.listdir(directory))  # OSError for a missing/unreadable dir
    manifest = []
    for name in names:
        path = os.path.join(directory, name)
        if not (os.path.isfile(path) and is_supported(name)):
            continue
        try:
            img = load_image(path)
        except (OSError, ValueError) as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        manifest.append(ManifestEntry(os.path.splitext(name)[0], path,
                                      img.shape[1], img.shape[0]))
    if not manifest:
        raise EmptyManifestError(f"no readable images in {directory}")
    ids = [e.id for e in manifest]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate image ids in {directory}")
    return manifest


def find_external(external_dir, image_id):
    for suffix in (".png", ".ppm", ".pgm", ".pnm"):
        path = os.path.join(external_dir, image_id + suffix)
        if os.path.isfile(path):
            return path
    raise FileNotFoundError(f"no external reconstruction for {image_id!r} in {external_dir}")


def reconstruct(ref, r, method, external_path=None, sigma=None):
    if method == "external":
        rec = load_image(external_path)
        if rec.shape != ref.shape:
            raise ValueError(f"external image is {rec.shape}, reference is {ref.shape}")
        return rec
    low = raster.degrade(ref, r, sigma=sigma)
    if method == "nn":
        return raster.upsample_nn(low, r)
    if method == "bicubic":
        return raster.upsample_bicubic(low, r)
    raise ValueError(f"unknown method {method!r}")


def run_pipeline(manifest, r, method, external_dir=None, sigma=None):
    """Yield ``(entry, ref, reconstructed, error)`` for every manifest entry.

    ``error`` is a message (and the images are None) when the entry could
    not be reconstructed.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "external" and external_dir is None:
        raise ValueError("method 'external' needs an external directory")
    for entry in manifest:
        try:
            yield (entry,) + _reconstruct_entry(entry, r, method, external_dir, sigma) + (None,)
        except (OSError, ValueError) as exc:
            log.warning("%s: %s", entry.id, exc)
            yield entry, None, None, str(exc)


def _reconstruct_entry(entry, r, method, external_dir, sigma):
    if entry.width % r or entry.height % r:
        raise ValueError(f"{entry.width}x{entry.height} not divisible by r={r}")
    ref = load_image(entry.path)
    ext = find_external(external_dir, entry.id) if method == "external" else None
    return ref, reconstruct(ref, r, method, ext, sigma)


def _safe_db(fn, *args):
    try:
        return fn(*args)
    except metrics.DegenerateMetricError:
        return math.inf


def _plane_scores(ref, rec, weights):
    smap = metrics.ssim_map(ref, rec)
    return (
        _safe_db(metrics.psnr, ref, rec),
        math.fsum(smap.ravel()) / smap.size,
        _safe_db(metrics.ws_psnr, ref, rec, weights),
        metrics.weighted_mean(smap, weights),
    )


def score_pair(ref, rec, plane="luma"):
    """The four metrics of one pair, in :data:`METRICS` order."""
    if plane not in PLANES:
        raise ValueError(f"unknown metric plane {plane!r}")
    if ref.shape != rec.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {rec.shape}")
    weights = row_weights(ref.shape[0])
    if plane == "luma" or ref.ndim == 2:
        return _plane_scores(raster.to_luma(ref), raster.to_luma(rec), weights)
    per_channel = [_plane_scores(ref[..., c], rec[..., c], weights) for c in range(ref.shape[2])]
    return tuple(_mean(col) for col in zip(*per_channel))


@dataclass
class MetricRow:
    id: str
    psnr_db: float
    ssim: float
    ws_psnr_db: float
    ws_ssim: float

    def values(self):
        return tuple(getattr(self, m) for m in METRICS)


def _mean(values):
    values = list(values)
    if any(math.isinf(v) for v in values):
        return math.inf
    return math.fsum(values) / len(values)


def _std(values):
    """Sample standard deviation (n - 1); 0 for a single value."""
    values = list(values)
    if len(values) < 2:
        return 0.0
    if any(math.isinf(v) for v in values):
        return math.nan
    mu = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in values) / (len(values) - 1))


@dataclass
class MetricReport:
    rows: list
    factor: int = None
    method: str = None
    plane: str = "luma"
    errors: list = field(default_factory=list)

    def column(self, metric):
        return [getattr(row, metric) for row in self.rows]

    def mean(self, metric):
        return _mean(self.column(metric))

    def std(self, metric):
        return _std(self.column(metric))

    @property
    def complete(self):
        return not self.errors

    def metadata(self):
        return {"factor": self.factor, "method": self.method, "plane": self.plane,
                "n": len(self.rows), "errors": [list(e) for e in self.errors]}


def evaluate(pairs, plane="luma", factor=None, method=None):
    """Score ``(id, ref, reconstructed)`` triples into a :class:`MetricReport`."""
    rows = [MetricRow(image_id, *score_pair(ref, rec, plane)) for image_id, ref, rec in pairs]
    if not rows:
        raise ValueError("nothing to evaluate")
    return MetricReport(rows, factor=factor, method=method, plane=plane)


def _score_entry(args):
    entry, r, method, external_dir, sigma, plane = args
    try:
        ref, rec = _reconstruct_entry(entry, r, method, external_dir, sigma)
        return MetricRow(entry.id, *score_pair(ref, rec, plane)), None
    except (OSError, ValueError) as exc:
        return None, str(exc)


def evaluate_manifest(manifest, r, method, plane="luma", external_dir=None, sigma=None, jobs=1):
    """Full pipeline over a manifest; per-image failures land in ``report.errors``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "external" and external_dir is None:
        raise ValueError("method 'external' needs an external directory")
    tasks = [(e, r, method, external_dir, sigma, plane) for e in manifest]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_score_entry, tasks))
    else:
        results = [_score_entry(t) for t in tasks]
    report = MetricReport([], factor=r, method=method, plane=plane)
    for entry, (row, err) in zip(manifest, results):
        if err is None:
            report.rows.append(row)
        else:
            log.warning("%s: %s", entry.id, err)
            report.errors.append((entry.id, err))
    return report


def _fmt(v):
    if math.isinf(v):
        return "∞" if v > 0 else "-∞"
    return format(v, ".17g")


def _parse(s):
    s = s.strip()
    if s in ("∞", "inf"):
        return math.inf
    if s in ("-∞", "-inf"):
        return -math.inf
    return float(s)


def report_csv(report):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for row in report.rows:
        out.writerow([row.id] + [_fmt(v) for v in row.values()])
    out.writerow(["mean"] + [_fmt(report.mean(m)) for m in METRICS])
    out.writerow(["std"] + [_fmt(report.std(m)) for m in METRICS])
    return buf.getvalue()


def _cell(mean, std):
    if math.isinf(mean):
        return "∞"
    return f"{mean:.2f} ± {std:.2f}"


def reports_markdown(reports):
    """Tables grouped by factor, one row per method, columns in the order
    SSIM, PSNR, WS-SSIM, WS-PSNR."""
    by_factor = {}
    for rep in reports:
        by_factor.setdefault(rep.factor, []).append(rep)
    lines = []
    for factor in sorted(by_factor, key=lambda f: (f is None, f or 0)):
        reps = by_factor[factor]
        n = sorted({len(r.rows) for r in reps})
        planes = sorted({r.plane for r in reps})
        lines.append(f"### r = {factor if factor is not None else '?'}")
        lines.append("")
        lines.append("| Method | SSIM | PSNR (dB) | WS-SSIM | WS-PSNR (dB) |")
        lines.append("|---|---|---|---|---|")
        for rep in reps:
            cells = [_cell(rep.mean(m), rep.std(m))
                     for m in ("ssim", "psnr_db", "ws_ssim", "ws_psnr_db")]
            lines.append(f"| {rep.method or '?'} | " + " | ".join(cells) + " |")
        lines.append("")
        lines.append(f"mean ± sample std (n - 1 divisor); images: {', '.join(map(str, n))}; "
                     f"plane: {', '.join(planes)}")
        lines.append("")
    return "\n".join(lines)


def _meta_path(path):
    return os.fspath(path) + ".meta.json"


def emit_report(report, fmt, path):
    """Write ``report`` as ``csv`` (plus a ``.meta.json`` sidecar) or ``markdown``."""
    if fmt == "csv":
        text = report_csv(report)
    elif fmt in ("md", "markdown"):
        text = reports_markdown([report])
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    if fmt == "csv":
        with open(_meta_path(path), "w", encoding="utf-8") as fh:
            json.dump(report.metadata(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_report_csv(path):
    """Load a report written by :func:`emit_report`; aggregates are recomputed."""
    with open(path, encoding="utf-8", newline="") as fh:
        records = list(csv.reader(fh))
    if not records or tuple(records[0]) != CSV_HEADER:
        raise ValueError(f"{path}: not a metric report")
    rows = [MetricRow(rec[0], *map(_parse, rec[1:]))
            for rec in records[1:] if rec and rec[0] not in ("mean", "std")]
    meta = {}
    if os.path.isfile(_meta_path(path)):
        with open(_meta_path(path), encoding="utf-8") as fh:
            meta = json.load(fh)
    method = meta.get("method") or os.path.splitext(os.path.basename(path))[0]
    return MetricReport(rows, factor=meta.get("factor"), method=method,
                        plane=meta.get("plane", "luma"),
                        errors=[tuple(e) for e in meta.get("errors", [])])


def crop_name(image_id, spec):
    yaw = format(round(math.degrees(spec.yaw), 6), "g")
    pitch = format(round(math.degrees(spec.pitch), 6), "g")
    return f"{image_id}_yaw{yaw}_pitch{pitch}.png"


def export_crops(images, specs, outdir):
    """Render every (image, view) pair to ``<id>_yaw<d>_pitch<d>.png``.

    ``images`` maps ids to ERP arrays (or is an iterable of pairs).
    Returns the written paths.
    """
    os.makedirs(outdir, exist_ok=True)
    items = images.items() if hasattr(images, "items") else images
    written = []
    for image_id, img in items:
        for spec in specs:
            path = os.path.join(outdir, crop_name(image_id, spec))
            save_image(raster.render_viewport(img, spec), path)
            written.append(path)
    return written


def load_views(path):
    """Parse a views file: a JSON list of {yaw_deg, pitch_deg, fov_deg, width, height}."""
    with open(path, encoding="utf-8") as fh:
        views = json.load(fh)
    if not isinstance(views, list):
        raise ValueError(f"{path}: expected a JSON list of views")
    return [ViewportSpec.from_degrees(v["yaw_deg"], v["pitch_deg"], v["fov_deg"],
                                      v["width"], v["height"]) for v in views]

