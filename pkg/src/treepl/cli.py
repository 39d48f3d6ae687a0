"""Command-line interface.

Exit codes: 0 ok, 2 usage, 3 domain/range, 4 data format, 5 numerical.
Report commands write their delimited output and a PNG figure of the same
name next to it.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

from . import constants as const
from . import io, plotting
from .errors import ExtrapolationWarning, TreePLError
from .fitting import fit_table
from .model import ModelTable, default_geometry, default_table, predict
from .pipeline import CalibrationConstants, ecdf, process_dataset
from .synth import SynthConfig, generate, ground_truth_record

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4, 5


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _load_table(path) -> ModelTable:
    return default_table() if path is None else io.read_table(path)


def cmd_predict(args) -> int:
    table = _load_table(args.table)
    mode = "interpolate" if args.interpolate else "exact"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ExtrapolationWarning)
        pl = predict(args.angle_deg, args.bandwidth_mhz * 1e6, table, mode, args.allow_out_of_range)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"PL = {pl:.4f} dB")
    return EXIT_OK


def cmd_curve(args) -> int:
    table = _load_table(args.table)
    grid = io.angle_grid(args.start_deg, args.stop_deg, args.step_deg)
    rows = list(io.export_curve(table, args.bandwidth_mhz, grid))
    out = io.write_curve(rows, args.out)
    fig = plotting.plot_curves(rows, plotting.figure_path(out))
    print(f"wrote {len(rows)} rows to {out} and figure {fig}")
    return EXIT_OK


def cmd_fit(args) -> int:
    groups = io.read_points(args.input, args.bandwidth_mhz)
    table, fits = fit_table(groups, return_fits=True)
    out = io.write_table(table, args.out)
    print(f"{'B [MHz]':>8} {'C':>9} {'D':>9} {'E':>9} {'F':>9} {'rms [dB]':>10} {'max [dB]':>10} {'n':>4}")
    for bw, fit in fits.items():
        c = fit.coeffs
        print(
            f"{bw / 1e6:8g} {c.c:9.2f} {c.d:9.2f} {c.e:9.2f} {c.f:9.2f} "
            f"{fit.rms_residual_db:10.2e} {fit.max_abs_residual_db:10.2e} {fit.n_points:4d}"
        )
    fig = plotting.plot_fit(groups, table, plotting.figure_path(out))
    print(f"wrote {out} and figure {fig}")
    return EXIT_OK


def _dataset_side_file(explicit, directory, name):
    if explicit is not None:
        return explicit
    candidate = Path(directory) / name
    return candidate if candidate.exists() else None


def cmd_process(args) -> int:
    cal_path = _dataset_side_file(args.cal, args.dataset, "calibration.json")
    geo_path = _dataset_side_file(args.geometry, args.dataset, "geometry.json")
    cal = io.read_calibration(cal_path) if cal_path else CalibrationConstants()
    geometry = io.read_geometry(geo_path) if geo_path else default_geometry()
    batches = io.read_dataset_dir(args.dataset)
    results = process_dataset(batches, cal, geometry, args.bandwidth_mhz * 1e6)
    out = io.write_results(results, args.out)
    fig = plotting.plot_results(results, plotting.figure_path(out))
    for r in results:
        tag = " (near)" if r.near else ""
        print(f"{r.angle_deg:8.3f} deg  PL = {r.pl_db:.4f} dB{tag}")
    print(f"wrote {out} and figure {fig}")
    return EXIT_OK


def cmd_synth(args) -> int:
    gt_arg = args.ground_truth
    ground_truth = io.read_table(gt_arg) if Path(gt_arg).is_file() else io.read_pl_list(gt_arg)
    angles = args.angles
    if angles is None:
        if isinstance(ground_truth, ModelTable):
            angles = list(const.MEASURED_ANGLES_DEG)
        else:
            angles = sorted(ground_truth)
    config = SynthConfig(
        angles_deg=angles,
        ground_truth=ground_truth,
        bandwidth_hz=args.bandwidth_mhz * 1e6,
        n_impulses=args.impulses,
        n_bins=args.bins,
        snr_db=None if math.isinf(args.snr_db) else args.snr_db,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for batch in generate(config):
        io.write_dataset(
            batch,
            out / io.dataset_filename(batch.angle_deg),
            args.encoding,
            metadata={"carrier_hz": const.CARRIER_HZ, "signal_band_hz": config.signal_band_hz},
        )
    io.write_json(ground_truth_record(config), out / "ground_truth.json")
    io.write_geometry(config.geometry, out / "geometry.json")
    io.write_calibration(config.cal, out / "calibration.json")
    print(f"wrote {len(config.angles_deg)} angle files to {out}")
    return EXIT_OK


def cmd_ecdf(args) -> int:
    e = ecdf(io.read_values(args.input))
    out = io.write_ecdf(e, args.out)
    fig = plotting.plot_ecdf({Path(args.input).stem: e}, plotting.figure_path(out))
    print(f"wrote {len(e)} rows to {out} and figure {fig}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treepl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("predict", help="path loss at one angle and bandwidth")
    s.add_argument("--angle-deg", type=float, required=True)
    s.add_argument("--bandwidth-mhz", type=float, required=True)
    s.add_argument("--table", help="coefficient table JSON (default: bundled table)")
    s.add_argument("--interpolate", action="store_true", help="interpolate between tabulated bandwidths")
    s.add_argument("--allow-out-of-range", action="store_true", help="evaluate outside the valid angle range")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("curve", help="path loss versus angle as CSV plus figure")
    s.add_argument("--bandwidth-mhz", type=_float_list, required=True, help="B[,B...]")
    s.add_argument("--start-deg", type=float, default=20.0)
    s.add_argument("--stop-deg", type=float, default=180.0)
    s.add_argument("--step-deg", type=float, default=1.0)
    s.add_argument("--table")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("fit", help="fit cubics to angle/PL points")
    s.add_argument("--input", required=True)
    s.add_argument("--bandwidth-mhz", type=float)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("process", help="path loss per angle from a measurement dataset")
    s.add_argument("--dataset", required=True)
    s.add_argument("--bandwidth-mhz", type=float, default=const.MAX_ANALYSIS_BANDWIDTH_HZ / 1e6)
    s.add_argument("--cal")
    s.add_argument("--geometry")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_process)

    s = sub.add_parser("synth", help="write a synthetic dataset with known path loss")
    s.add_argument("--ground-truth", required=True, help="table JSON file or 'angle:pl,...' list")
    s.add_argument("--angles", type=_float_list)
    s.add_argument("--snr-db", type=float, default=40.0, help="'inf' for noiseless")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--bandwidth-mhz", type=float, default=const.MAX_ANALYSIS_BANDWIDTH_HZ / 1e6)
    s.add_argument("--impulses", type=int, default=const.DEFAULT_IMPULSES)
    s.add_argument("--bins", type=int, default=4096)
    s.add_argument("--encoding", choices=io.ENCODINGS, default="binary-f32le")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ecdf", help="empirical CDF of dB values")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ecdf)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TreePLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
