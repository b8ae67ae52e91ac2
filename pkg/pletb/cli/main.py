"""Command-line entry point: synthesize, fit, estimate and reconstruct PLE linewidths."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .. import __version__
from ..estimators import ESTIMATORS, LinewidthSampleSet, estimate
from ..exceptions import EstimatorError, PletbError
from ..fitting import FREE, TIED, fit_batch
from ..mcm import MCMSettings, run_mcm
from ..study import (
    DESK_REPETITIONS,
    MCM,
    FULL_REPETITIONS,
    SWEEP_ESTIMATORS,
    SweepSpec,
    bias_sweep,
    consistency_threshold,
    mcm_quality_sweep,
    stability_curve,
)
from ..synth import ScanModel, estimate_noise_mean, estimate_photon_statistics, synth_batch
from .config import load_run_config
from .io import (
    ingest,
    write_fit_csv,
    write_json,
    write_matrix_csv,
    write_scan_file,
    write_surface_csv,
    write_table_csv,
)
from .manifest import write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 3

ALL_ESTIMATORS = "all"
STUDY_MATRIX_METRICS = ("bias", "relative_bias", "signed_bias", "std", "relative_std", "consistency", "n_dropped")


def _float_list(text):
    """``a,b,c`` or an inclusive range ``lo:hi:step``."""
    try:
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            n = int((hi - lo) / step + 1e-9) + 1
            return tuple(lo + i * step for i in range(n))
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b,c' or 'lo:hi:step', got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run config; flags override its values.")
    common.add_argument("--output-dir", default=None, help="Output directory (default: $PLETB_OUTPUT_DIR).")
    common.add_argument("--seed", type=int, default=None, help="Base seed of every random stream.")
    common.add_argument("--threads", type=int, default=None, help="Cap on worker processes.")
    common.add_argument("--cache-dir", default=None, help="Directory for simulated MCM libraries.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeatable).")
    common.add_argument("-q", "--quiet", action="store_true", help="Only log errors.")
    return common


def _add_model_arguments(parser):
    parser.add_argument("--sigma", type=float, default=None, help="Std of the signal photon count.")
    parser.add_argument("--noise", type=float, default=None, help="Poisson mean of background counts per scan.")


def _add_fit_arguments(parser):
    parser.add_argument("--mode", choices=(TIED, FREE), default=None, help="Voigt fit mode.")
    parser.add_argument("--min-counts", type=int, default=None, help="Acceptance: counts needed in one bin.")


def _add_scan_input(parser):
    parser.add_argument("scan_file", type=Path, metavar="SCANS", help="ScanFile to read.")
    parser.add_argument("--resonance", type=float, default=None, help="Nominal resonance in header units (MHz).")
    _add_fit_arguments(parser)


def _build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="pletb", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    synth = commands.add_parser("synth", parents=[common], help="Write a synthetic ScanFile.")
    synth.add_argument("--fwhm", type=float, default=None, help="True Lorentzian FWHM in MHz.")
    synth.add_argument("--nbar", type=float, default=None, help="Mean signal photons per scan.")
    synth.add_argument("--scans", type=int, default=None, help="Number of scans.")
    synth.add_argument(
        "--window", type=_float_list, default=None, help="lo,hi,bin_width in MHz, e.g. --window=-75,75,2."
    )
    _add_model_arguments(synth)
    synth.set_defaults(handler=cmd_synth)

    fit = commands.add_parser("fit", parents=[common], help="Fit a Voigt line to every scan.")
    _add_scan_input(fit)
    fit.set_defaults(handler=cmd_fit)

    est = commands.add_parser("estimate", parents=[common], help="Classical linewidth estimates.")
    _add_scan_input(est)
    est.add_argument("--method", choices=ESTIMATORS + (ALL_ESTIMATORS,), default="median")
    est.add_argument("--confidence", type=float, default=None, help="Confidence level of the intervals.")
    est.set_defaults(handler=cmd_estimate)

    mcm = commands.add_parser("mcm", parents=[common], help="Monte Carlo chi-square reconstruction.")
    _add_scan_input(mcm)
    _add_model_arguments(mcm)
    mcm.add_argument("--noise-file", type=Path, default=None, help="Off-resonance ScanFile to estimate noise from.")
    mcm.add_argument("--gamma-min", type=float, default=None)
    mcm.add_argument("--gamma-max", type=float, default=None)
    mcm.add_argument("--gamma-step", type=float, default=None)
    mcm.add_argument("--nbar-min", type=float, default=None)
    mcm.add_argument("--nbar-max", type=float, default=None)
    mcm.add_argument("--nbar-step", type=float, default=None)
    mcm.add_argument("--replicas", type=int, default=None, help="Simulated scans per grid cell.")
    mcm.add_argument("--delta", type=float, default=None, help="S_min offset bounding the confidence region.")
    mcm.set_defaults(handler=cmd_mcm)

    study = commands.add_parser("study", help="Bias, stability and threshold studies on synthetic data.")
    kinds = study.add_subparsers(dest="study", metavar="kind")
    kinds.required = True
    for name, handler, description in (
        ("bias", cmd_study_bias, "Bias and spread of one estimator per (gamma, nbar)."),
        ("stability", cmd_study_stability, "Spread of the estimate against the scan count."),
        ("threshold", cmd_study_threshold, "Smallest nbar reaching the consistency target."),
        ("mcm-quality", cmd_study_mcm_quality, "MCM bias, CI width and scans needed."),
    ):
        kind = kinds.add_parser(name, parents=[common], help=description)
        kind.add_argument("--gammas", type=_float_list, default=None, help="FWHM axis in MHz.")
        kind.add_argument("--nbars", type=_float_list, default=None, help="Photon axis.")
        kind.add_argument("--k", type=int, default=None, help="Scans per batch.")
        kind.add_argument("--repetitions", type=int, default=None)
        kind.add_argument("--full-scale", action="store_true", help=f"{FULL_REPETITIONS} repetitions per cell.")
        kind.add_argument("--estimator", choices=SWEEP_ESTIMATORS, default=None)
        kind.add_argument("--precision", type=float, default=0.02, help="Relative tolerance around the truth.")
        kind.add_argument("--fixed-grid", action="store_true", help="MCM searches the config grid in every cell.")
        kind.add_argument("--ks", type=_int_list, default=(250, 500, 1000, 2000), help="Scan counts to compare.")
        kind.add_argument("--confidence", type=float, default=None)
        _add_model_arguments(kind)
        _add_fit_arguments(kind)
        kind.set_defaults(handler=handler)

    check = commands.add_parser("ingest-check", parents=[common], help="Validate a ScanFile and summarize it.")
    check.add_argument("scan_file", type=Path, metavar="SCANS")
    check.add_argument("--resonance", type=float, default=None)
    check.set_defaults(handler=cmd_ingest_check)
    return parser


def _effective_config(args):
    """Config file first, then every flag the user actually passed."""
    config = load_run_config(args.config)
    get = lambda name: getattr(args, name, None)  # noqa: E731
    window = get("window")
    if window is not None and len(window) != 3:
        raise argparse.ArgumentTypeError("--window needs lo,hi,bin_width")
    grid = {
        "gamma_lo": get("gamma_min"),
        "gamma_hi": get("gamma_max"),
        "gamma_step": get("gamma_step"),
        "nbar_lo": get("nbar_min"),
        "nbar_hi": get("nbar_max"),
        "nbar_step": get("nbar_step"),
    }
    return config.updated(
        window=None if window is None else dict(zip(("lo", "hi", "bin_width"), window)),
        rule={"min_counts_per_bin": get("min_counts")} if get("min_counts") is not None else None,
        fit_config={"mode": get("mode")} if get("mode") is not None else None,
        grid={k: v for k, v in grid.items() if v is not None} or None,
        true_fwhm=get("fwhm"),
        mean_photons=get("nbar"),
        photon_sigma=get("sigma"),
        noise_mean=get("noise"),
        scans=get("scans"),
        replicas=get("replicas"),
        delta=get("delta"),
        confidence=get("confidence"),
        resonance_mhz=get("resonance"),
        seed=get("seed"),
        threads=get("threads"),
        output_dir=get("output_dir"),
        cache_dir=get("cache_dir"),
    )


def _output_dir(config):
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fit_file(args, config):
    scans = ingest(args.scan_file, config.resonance_mhz)
    if not scans:
        raise EstimatorError(f"{args.scan_file} holds no scans")
    batch = fit_batch(scans, config.rule, config.fit_config, config.threads)
    logger.info("fits: %s", batch.summary())
    return scans, batch


def _accepted_samples(batch, source):
    samples = LinewidthSampleSet.from_fits(batch, metadata={"source": str(source)})
    if len(samples) == 0:
        raise EstimatorError(f"no accepted scans among {batch.n_scans} in {source}")
    return samples


def cmd_synth(args, config):
    model = ScanModel(
        true_fwhm=config.true_fwhm,
        mean_photons=config.mean_photons,
        photon_sigma=6.0 if config.photon_sigma is None else config.photon_sigma,
        noise_mean=config.noise_mean,
        window=config.window,
        seed=config.seed,
    )
    scans = synth_batch(model, config.scans, config.threads)
    return [write_scan_file(_output_dir(config) / "scans.csv", scans)]


def cmd_fit(args, config):
    _, batch = _fit_file(args, config)
    return [write_fit_csv(_output_dir(config) / "fits.csv", batch)]


def cmd_estimate(args, config):
    _, batch = _fit_file(args, config)
    samples = _accepted_samples(batch, args.scan_file)
    methods = ESTIMATORS if args.method == ALL_ESTIMATORS else (args.method,)
    reports = []
    for method in methods:
        try:
            report = estimate(samples, method, config.confidence, seed=config.seed).to_dict()
        except EstimatorError as error:
            if len(methods) == 1:
                raise
            logger.warning("%s estimate skipped: %s", method, error.message)
            report = {"estimator": method, **error.to_dict()}
        else:
            logger.info("%s: %.3f MHz [%.3f, %.3f]", method, report["value_mhz"], report["ci_lo"], report["ci_hi"])
        reports.append(report)
    out = {
        "confidence": config.confidence,
        "k_total": batch.n_scans,
        "k_used": len(samples),
        "acceptance_rate": batch.acceptance_rate,
        "estimates": reports,
    }
    return [write_json(_output_dir(config) / "estimate.json", out)]


def cmd_mcm(args, config):
    scans, batch = _fit_file(args, config)
    noise_mean = config.noise_mean
    if args.noise_file is not None:
        noise_mean = estimate_noise_mean(ingest(args.noise_file, config.resonance_mhz))
        logger.info("background mean from %s: %.3f counts per scan", args.noise_file, noise_mean)
    mean_photons, photon_sigma = estimate_photon_statistics(scans, noise_mean)
    if config.photon_sigma is not None:
        photon_sigma = config.photon_sigma
    else:
        logger.info("photon count spread estimated from the data: sigma=%.3f (nbar=%.2f)", photon_sigma, mean_photons)
    settings = MCMSettings(
        window=scans[0].window,
        rule=config.rule,
        fit_config=config.fit_config,
        binning=config.binning,
        photon_sigma=photon_sigma,
        noise_mean=noise_mean,
        replicas=config.replicas,
        delta=config.delta,
        workers=config.threads,
        cache_dir=config.cache_dir,
    )
    samples = _accepted_samples(batch, args.scan_file)
    surface, result = run_mcm(samples, config.grid, settings, config.seed)
    logger.info(
        "gamma=%.1f MHz [%.1f, %.1f], nbar=%.1f, S_min=%.2f",
        result.gamma,
        *result.gamma_ci,
        result.nbar,
        result.S_min,
    )
    directory = _output_dir(config)
    summary = {
        "result": result.to_dict(),
        "settings": settings.to_dict(),
        "grid": config.grid.to_dict(),
        "k_total": batch.n_scans,
        "k_used": len(samples),
        "data_nbar": mean_photons,
    }
    return [
        write_json(directory / "mcm_result.json", summary),
        write_json(directory / "mcm_surface.json", surface.to_dict()),
        write_surface_csv(directory / "mcm_surface.csv", surface),
    ]


def _sweep_spec(args, config, estimator=None):
    repetitions = args.repetitions or (FULL_REPETITIONS if args.full_scale else DESK_REPETITIONS)
    return SweepSpec(
        gammas=args.gammas or (config.true_fwhm,),
        nbars=args.nbars or (config.mean_photons,),
        k=args.k or config.scans,
        repetitions=repetitions,
        estimator=estimator or args.estimator or "median",
        photon_sigma=6.0 if config.photon_sigma is None else config.photon_sigma,
        noise_mean=config.noise_mean,
        seed=config.seed,
        window=config.window,
        rule=config.rule,
        fit_config=config.fit_config,
        binning=config.binning,
        mcm_grid=config.grid if args.fixed_grid else None,
        mcm_replicas=config.replicas,
        workers=config.threads,
        cache_dir=config.cache_dir,
        confidence=config.confidence,
    )


def _write_study_report(directory, report):
    outputs = [write_json(directory / "report.json", report.to_dict())]
    spec = report.spec
    metrics = STUDY_MATRIX_METRICS + ("ci_width", "coverage") + (("scans_needed",) if spec.estimator == MCM else ())
    for metric in metrics:
        outputs.append(write_matrix_csv(directory / f"{metric}.csv", report.matrix(metric), spec.gammas, spec.nbars))
    return outputs


def cmd_study_bias(args, config):
    report = bias_sweep(_sweep_spec(args, config), args.precision)
    return _write_study_report(_output_dir(config), report)


def cmd_study_mcm_quality(args, config):
    report = mcm_quality_sweep(_sweep_spec(args, config, estimator=MCM), args.ks, args.precision)
    return _write_study_report(_output_dir(config), report)


def cmd_study_stability(args, config):
    spec = _sweep_spec(args, config)
    report = stability_curve(spec.gammas[0], spec.nbars, args.ks, spec.repetitions, base=spec)
    directory = _output_dir(config)
    return [
        write_json(directory / "stability.json", report.to_dict()),
        write_matrix_csv(directory / "std.csv", report.std, report.nbars, report.ks, "nbar", "k"),
        write_matrix_csv(directory / "relative_std.csv", report.relative_std, report.nbars, report.ks, "nbar", "k"),
    ]


def cmd_study_threshold(args, config):
    spec = _sweep_spec(args, config)
    results = [
        consistency_threshold(gamma, spec.nbars, args.precision, config.confidence, spec.k, spec.repetitions, base=spec)
        for gamma in spec.gammas
    ]
    for result in results:
        logger.info("gamma=%g MHz: nbar*=%g (bracketed=%s)", result.gamma, result.nbar, result.bracketed)
    directory = _output_dir(config)
    rows = [(r.gamma, r.nbar, "1" if r.bracketed else "0", r.step) for r in results]
    summary = {"spec": spec.to_dict(), "thresholds": [r.to_dict() for r in results]}
    return [
        write_json(directory / "thresholds.json", summary),
        write_table_csv(directory / "thresholds.csv", ["gamma_mhz", "nbar_threshold", "bracketed", "step"], rows),
    ]


def cmd_ingest_check(args, config):
    scans = ingest(args.scan_file, config.resonance_mhz)
    summary = {"path": str(args.scan_file), "n_scans": len(scans)}
    if scans:
        totals = [scan.total for scan in scans]
        summary.update(
            window=scans[0].window.to_dict(),
            n_bins=scans[0].window.n_bins,
            total_counts=int(sum(totals)),
            empty_scans=sum(1 for t in totals if t == 0),
            mean_counts=sum(totals) / len(totals),
        )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return None


def _configure_logging(verbose, quiet):
    level = logging.ERROR if quiet else (logging.DEBUG if verbose > 1 else logging.INFO if verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _report_error(payload):
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        try:
            config = _effective_config(args)
        except argparse.ArgumentTypeError as error:
            parser.error(str(error))
        logger.info("pletb %s %s", __version__, args.command)
        logger.info("effective config: %s", json.dumps(config.to_dict(), sort_keys=True))
        logger.info("seed: %d", config.seed)
        outputs = args.handler(args, config)
        if outputs is not None:
            manifest = write_manifest(_output_dir(config), ["pletb"] + argv, config, config.seed, outputs)
            logger.info("wrote %s", ", ".join(str(p) for p in list(outputs) + [manifest]))
    except PletbError as error:
        _report_error(error.to_dict())
        return error.exit_code
    except OSError as error:
        _report_error({"error": "io_error", "message": str(error)})
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
