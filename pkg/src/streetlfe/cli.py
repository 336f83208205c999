"""Command-line batch surface over the estimation pipeline.

Subcommands: estimate, eval, eval-seg, synth, decode-depth, stitch.
Results persist as GeoJSON so they drop straight into GIS tooling; runs
are deterministic (feature order follows the parcel file, floats are
serialized at fixed precision).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import depth as depthmod
from . import ingest, masks as maskmod, metrics, synth
from .config import load_config
from .errors import MissingManifest, NoOverlap, PipelineError
from .extraction import LfeRecord, UnavailableReason, estimate_lfe, select_mask

METERS_DECIMALS = 4
COORD_DECIMALS = 7


def _round_opt(value: float | None, decimals: int) -> float | None:
    return None if value is None else round(float(value), decimals)


def _record_feature(record: LfeRecord, parcel: ingest.Parcel) -> dict:
    props = {
        "property_id": record.property_id,
        "status": record.status_label,
        "n_points_used": record.n_points_used,
        "panorama_id": record.panorama_id,
        "camera_elev_m": _round_opt(record.camera_elev_m, METERS_DECIMALS),
    }
    if record.lfe_m is not None:
        props["lfe_m"] = _round_opt(record.lfe_m, METERS_DECIMALS)
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [
                round(parcel.centroid.lon, COORD_DECIMALS),
                round(parcel.centroid.lat, COORD_DECIMALS),
            ],
        },
        "properties": props,
    }


def _load_depth(path: Path) -> depthmod.DepthGrid:
    if path.suffix == ".bin":
        return depthmod.load_raw_grid(path)
    return depthmod.load_payload_file(path)


def cmd_estimate(args: argparse.Namespace) -> int:
    overrides = {
        "fov_deg": args.fov_deg,
        "min_points": args.min_points,
        "outlier_k": args.outlier_k,
        "concurrency": args.concurrency,
        "live_fetch": True if args.live_fetch else None,
    }
    cfg = load_config(args.config, overrides)
    parcels = ingest.load_parcels(args.parcels)
    panos = ingest.scan_pano_dir(args.panos)
    try:
        all_masks = maskmod.scan_mask_bundles(args.masks)
    except MissingManifest:
        # A bundle-less masks root means every parcel is simply mask-free;
        # that is a per-property condition, not a batch failure.
        all_masks = []

    masks_by_pid: dict[str, list[maskmod.SegMask]] = {}
    for m in all_masks:
        masks_by_pid.setdefault(m.property_id, []).append(m)

    # Depth grids are shared and immutable; load them once before fan-out.
    grids: dict[str, depthmod.DepthGrid] = {}
    for parcel in parcels:
        pmasks = masks_by_pid.get(parcel.property_id)
        if not pmasks:
            continue
        pano_id = select_mask(pmasks).panorama_id
        source = panos.get(pano_id)
        if source and source.depth_path and pano_id not in grids:
            grids[pano_id] = _load_depth(source.depth_path)

    def estimate_one(parcel: ingest.Parcel) -> LfeRecord:
        pid = parcel.property_id
        pmasks = masks_by_pid.get(pid, [])
        if not pmasks:
            return LfeRecord(
                property_id=pid,
                reason=UnavailableReason.NO_MASK,
                lfe_m=None,
                n_points_used=0,
                camera_elev_m=None,
                panorama_id=None,
            )
        best = select_mask(pmasks)
        source = panos.get(best.panorama_id)
        if source is None or source.depth_path is None:
            return LfeRecord(
                property_id=pid,
                reason=UnavailableReason.DEPTH_MISSING,
                lfe_m=None,
                n_points_used=0,
                camera_elev_m=source.asset.camera_elev_m if source else None,
                panorama_id=best.panorama_id,
            )
        same_pano = [m for m in pmasks if m.panorama_id == best.panorama_id]
        try:
            return estimate_lfe(
                source.asset, grids[best.panorama_id], same_pano, cfg, property_id=pid
            )
        except PipelineError:
            return LfeRecord(
                property_id=pid,
                reason=UnavailableReason.DEPTH_MISSING,
                lfe_m=None,
                n_points_used=0,
                camera_elev_m=source.asset.camera_elev_m,
                panorama_id=best.panorama_id,
            )

    with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        records = list(pool.map(estimate_one, parcels))

    features = [_record_feature(rec, parcel) for rec, parcel in zip(records, parcels)]
    doc = {"type": "FeatureCollection", "features": features}
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    n_available = sum(1 for r in records if r.available)
    if records:
        pct = metrics.availability(n_available, len(records))
        print(f"estimated {len(records)} properties: {n_available} available ({pct:.2f}%)")
    else:
        print("estimated 0 properties")
    return 0


def _load_predictions(path: Path | str) -> dict[str, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("type") != "FeatureCollection":
        raise PipelineError(f"{path}: expected a GeoJSON FeatureCollection")
    preds = {}
    for feature in doc.get("features", []):
        props = feature.get("properties") or {}
        pid = props.get("property_id")
        if pid is not None:
            preds[str(pid)] = props
    return preds


def cmd_eval(args: argparse.Namespace) -> int:
    preds = _load_predictions(args.pred)
    truth = ingest.load_parcels(args.truth)
    overlap = [p for p in truth if p.property_id in preds]
    if not overlap:
        raise NoOverlap("predictions and truth share no property ids")

    def is_available(parcel: ingest.Parcel) -> bool:
        return preds[parcel.property_id].get("status") == "Available"

    n_total = len(overlap)
    n_available = sum(1 for p in overlap if is_available(p))
    availability_pct = metrics.availability(n_available, n_total)

    visible = [p for p in overlap if p.front_door_visible]
    visible_pct = None
    if visible:
        visible_pct = metrics.availability(
            sum(1 for p in visible if is_available(p)), len(visible)
        )

    pairs = [
        (float(preds[p.property_id]["lfe_m"]), p.lfe_truth_m)
        for p in overlap
        if is_available(p) and p.lfe_truth_m is not None and "lfe_m" in preds[p.property_id]
    ]
    mae_m = metrics.mae(pairs) if pairs else None

    report = metrics.EvalReport(
        mae_m=mae_m,
        availability_pct=availability_pct,
        availability_visible_pct=visible_pct,
    )
    print(report.to_table())
    print(f"availability: {availability_pct:.2f}% ({n_available}/{n_total})")
    if visible_pct is not None:
        n_vis_avail = sum(1 for p in visible if is_available(p))
        print(
            f"availability in visible-front-door subset: {visible_pct:.2f}%"
            f" ({n_vis_avail}/{len(visible)})"
        )
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_eval_seg(args: argparse.Namespace) -> int:
    watch = metrics.Stopwatch()
    pred = maskmod.scan_mask_bundles(args.pred)
    gt = maskmod.scan_mask_bundles(args.gt)
    wrap = args.pano_width

    def group(ms: list[maskmod.SegMask]) -> dict[tuple[str, str], list[maskmod.SegMask]]:
        out: dict[tuple[str, str], list[maskmod.SegMask]] = {}
        for m in ms:
            out.setdefault((m.panorama_id, m.property_id), []).append(m)
        return out

    pred_groups = group(pred)
    gt_groups = group(gt)

    # Aggregate pixel counts: per (panorama, property), predictions are the
    # union of that pair's masks, compared against the union of its truth.
    tp = fp = fn = 0
    for key in sorted(set(pred_groups) | set(gt_groups)):
        pred_px: set[int] = set()
        for m in pred_groups.get(key, []):
            pred_px |= metrics.mask_pixel_keys(m, wrap)
        gt_px: set[int] = set()
        for m in gt_groups.get(key, []):
            gt_px |= metrics.mask_pixel_keys(m, wrap)
        tp += len(pred_px & gt_px)
        fp += len(pred_px - gt_px)
        fn += len(gt_px - pred_px)
    iou_pct = metrics.ConfusionCounts(tp=tp, fp=fp, fn=fn).iou_pct()

    detections = [
        metrics.Detection(image_id=m.panorama_id, score=m.score, ref=m) for m in pred
    ]
    gts_by_image: dict[str, list[maskmod.SegMask]] = {}
    for m in gt:
        gts_by_image.setdefault(m.panorama_id, []).append(m)
    ap = metrics.ap50(
        detections,
        gts_by_image,
        iou_fn=lambda det, g: metrics.segmask_confusion(det.ref, g, wrap).iou_pct() / 100.0,
    )

    images = {m.panorama_id for m in pred} | {m.panorama_id for m in gt}
    report = metrics.EvalReport(
        iou_pct=iou_pct, ap50_pct=ap, fps=metrics.fps(len(images), watch.elapsed_s())
    )
    print(report.to_table())
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = synth.load_scene(args.scene)
    paths = synth.write_scene_fixture(spec, args.out)
    print(f"scene fixture written to {args.out}")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return 0


def cmd_decode_depth(args: argparse.Namespace) -> int:
    grid = depthmod.load_payload_file(args.infile)
    depthmod.save_raw_grid(args.out, grid)
    print(f"decoded {grid.width_px}x{grid.height_px} depth grid -> {args.out}")
    return 0


def cmd_stitch(args: argparse.Namespace) -> int:
    from PIL import Image

    tiles, rows, cols = ingest.load_tile_dir(args.tiles)
    pano = ingest.stitch_tiles(tiles, rows, cols)
    Image.fromarray(pano).save(args.out)
    print(f"stitched {rows}x{cols} tiles -> {pano.shape[1]}x{pano.shape[0]} panorama")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streetlfe",
        description="Estimate building lowest floor elevations from street-view assets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="batch LFE estimation over a parcel file")
    p_est.add_argument("--parcels", required=True, help="GeoJSON parcel file")
    p_est.add_argument("--panos", required=True, help="directory of panorama metadata + depth")
    p_est.add_argument("--masks", required=True, help="mask bundle directory (or parent of many)")
    p_est.add_argument("--out", required=True, help="output GeoJSON path")
    p_est.add_argument("--config", default=None, help="TOML config file")
    p_est.add_argument("--fov-deg", dest="fov_deg", type=float, default=None)
    p_est.add_argument("--min-points", dest="min_points", type=int, default=None)
    p_est.add_argument("--outlier-k", dest="outlier_k", type=float, default=None)
    p_est.add_argument("--concurrency", type=int, default=None)
    p_est.add_argument("--live-fetch", dest="live_fetch", action="store_true")
    p_est.set_defaults(func=cmd_estimate)

    p_eval = sub.add_parser("eval", help="score predictions against ground truth")
    p_eval.add_argument("--pred", required=True, help="predictions GeoJSON")
    p_eval.add_argument("--truth", required=True, help="truth GeoJSON (parcel schema)")
    p_eval.add_argument("--out", default=None, help="optional JSON report path")
    p_eval.set_defaults(func=cmd_eval)

    p_seg = sub.add_parser("eval-seg", help="score mask bundles against truth bundles")
    p_seg.add_argument("--pred", required=True, help="predicted mask bundle directory")
    p_seg.add_argument("--gt", required=True, help="ground-truth mask bundle directory")
    p_seg.add_argument("--pano-width", dest="pano_width", type=int, default=None,
                       help="panorama width for seam-wrapped comparison")
    p_seg.add_argument("--out", default=None, help="optional JSON report path")
    p_seg.set_defaults(func=cmd_eval_seg)

    p_synth = sub.add_parser("synth", help="render a synthetic scene fixture")
    p_synth.add_argument("--scene", required=True, help="scene JSON file")
    p_synth.add_argument("--out", required=True, help="output fixture directory")
    p_synth.set_defaults(func=cmd_synth)

    p_dec = sub.add_parser("decode-depth", help="decode a base64 depth payload to a raw grid")
    p_dec.add_argument("--in", dest="infile", required=True, help="base64 payload text file")
    p_dec.add_argument("--out", required=True, help="output raw grid path")
    p_dec.set_defaults(func=cmd_decode_depth)

    p_st = sub.add_parser("stitch", help="concatenate a tile grid into one panorama image")
    p_st.add_argument("--tiles", required=True, help="directory of {row}_{col} tiles")
    p_st.add_argument("--out", required=True, help="output image path")
    p_st.set_defaults(func=cmd_stitch)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "live_fetch", False) and not os.environ.get("STREETLFE_API_KEY"):
        print("error: --live-fetch requires STREETLFE_API_KEY", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (PipelineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
