"""
BQR Command Line Interface

Usage:
    bqr fit --input data.csv --response gini --taus 0.1,0.5,0.9 --out results/
    bqr diagnose --input data.csv --response gini --flag-threshold 0.1
    bqr simulate --scenario 4 --reps 20 --seed 7
    bqr calibrate --n-values 100,300 --reps 20
    bqr curve --taus 0.1,0.25,0.5 --out results/

에러 발생 시 stderr에 JSON 한 줄을 출력하고 exit status 1로 종료한다.
"""

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError

from bqr import __version__
from bqr.common.ald import variance_curve
from bqr.common.gibbs import Dataset, PosteriorChains, fit_taus, sigma_curve, summarize_chains
from bqr.common.outliers import build_report, top_outliers
from bqr.common.simulation import run_calibration_study, run_study
from bqr.config.config_loader import ConfigLoader, merge_overrides
from bqr.config.fit_config import (
    APPLICATION_TAUS,
    CALIBRATION_TAUS,
    SCENARIO_TAUS,
    CalibrationSpec,
    KlMode,
    ProbRule,
    RunManifest,
    ScenarioSpec,
)
from bqr.config.settings import get_settings
from bqr.errors import BQRError, DataIngestError
from bqr.utils.csv_io import load_csv, tau_label, write_csv, write_manifest
from bqr.utils.logging import BQRLogger, set_log_level

logger = BQRLogger("cli")

CURVE_TAUS = [round(0.05 * k, 2) for k in range(1, 20)]

COMMAND_TAUS: dict[str, list[float]] = {
    "fit": APPLICATION_TAUS,
    "diagnose": APPLICATION_TAUS,
    "simulate": SCENARIO_TAUS,
    "calibrate": CALIBRATION_TAUS,
    "curve": CURVE_TAUS,
}
# prob_rule 기본값이 maxrule인 커맨드 (build_report 기본값은 pairwise)
MAXRULE_COMMANDS = ("diagnose", "simulate", "calibrate")


# =============================================================================
# Argument parsing
# =============================================================================


def _parse_list(raw: str, cast: Callable[[str], Any]) -> list[Any]:
    """콤마 구분 목록 파싱 ("0.1,0.5" → [0.1, 0.5])"""
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ValueError(f"Empty list: {raw!r}")
    try:
        return [cast(item) for item in items]
    except ValueError as e:
        raise ValueError(f"Could not parse list {raw!r}: {e}") from e


def build_parser() -> argparse.ArgumentParser:
    """서브커맨드별 argparse 파서 생성"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run config")
    common.add_argument("--taus", help="comma-separated quantile levels")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--iterations", type=int)
    chain.add_argument("--burnin", type=int)
    chain.add_argument("--thin", type=int)
    chain.add_argument("--seed", type=int)
    chain.add_argument("--prior-beta-var", type=float)
    chain.add_argument("--prior-sigma-shape", type=float)
    chain.add_argument("--prior-sigma-rate", type=float)
    chain.add_argument("--workers", type=int, help="fan-out cap (default: BQR_THREADS)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=Path, help="input CSV")
    data.add_argument("--response", help="response column name")
    data.add_argument("--no-intercept", action="store_true", default=None)
    data.add_argument("--draws", action="store_true", default=None, help="write draw matrices")
    data.add_argument("--credible-level", type=float)

    diagnose = argparse.ArgumentParser(add_help=False)
    diagnose.add_argument(
        "--prob-rule", choices=[r.value for r in ProbRule], help="default: maxrule"
    )
    diagnose.add_argument(
        "--kl-mode",
        choices=[m.value for m in KlMode],
        help="all: n(n-1)/2 KDE pairs per τ; single: n-1 pairs against one reference row",
    )
    diagnose.add_argument("--kl-reference", type=int, help="reference row for single mode")
    diagnose.add_argument("--flag-threshold", type=float)

    study = argparse.ArgumentParser(add_help=False)
    study.add_argument("--reps", type=int, help="replications")

    parser = argparse.ArgumentParser(
        prog="bqr",
        description="Bayesian quantile regression with latent-variable outlier diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fit", parents=[common, chain, data], help="fit one chain per τ")
    sub.add_parser(
        "diagnose", parents=[common, chain, data, diagnose], help="outlier probabilities and KL"
    )
    simulate = sub.add_parser(
        "simulate", parents=[common, chain, diagnose, study], help="outlier scenario study"
    )
    simulate.add_argument(
        "--scenario", type=int, choices=[1, 2, 3, 4], action="append", dest="scenarios"
    )
    calibrate = sub.add_parser(
        "calibrate", parents=[common, chain, diagnose, study], help="no-outlier calibration study"
    )
    calibrate.add_argument("--n-values", help="comma-separated sample sizes")
    sub.add_parser("curve", parents=[common], help="ALD variance factor T(τ)")
    return parser


def _drop_none(values: dict[str, Any]) -> dict[str, Any]:
    """None 값과 빈 하위 dict 제거 (명시된 플래그만 오버라이드)"""
    cleaned: dict[str, Any] = {}
    for key, value in values.items():
        if isinstance(value, dict):
            value = _drop_none(value)
            if not value:
                continue
        if value is not None:
            cleaned[key] = value
    return cleaned


def build_manifest(args: argparse.Namespace) -> RunManifest:
    """
    YAML 설정(--config) 위에 명시된 CLI 플래그를 덮어써 RunManifest 생성

    τ 기본값은 커맨드별로 다르다 (fit/diagnose 0.1..0.9, simulate 0.1/0.5/0.9,
    calibrate 0.25/0.5/0.75). diagnose/simulate/calibrate의 prob_rule 기본값은 maxrule.
    """
    def get(name: str) -> Any:
        return getattr(args, name, None)

    taus = _parse_list(args.taus, float) if args.taus else None
    n_values = _parse_list(args.n_values, int) if get("n_values") else None
    no_intercept = get("no_intercept")

    overrides = _drop_none(
        {
            "command": args.command,
            "input_path": get("input"),
            "response": get("response"),
            "intercept": False if no_intercept else None,
            "taus": taus,
            "credible_level": get("credible_level"),
            "write_draws": get("draws"),
            "scenarios": get("scenarios"),
            "replications": get("reps"),
            "n_values": n_values,
            "output_dir": args.out,
            "workers": get("workers"),
            "fit": {
                "iterations": get("iterations"),
                "burn_in": get("burnin"),
                "thin": get("thin"),
                "seed": get("seed"),
                "prior": {
                    "beta_variance": get("prior_beta_var"),
                    "sigma_shape": get("prior_sigma_shape"),
                    "sigma_rate": get("prior_sigma_rate"),
                },
            },
            "diagnose": {
                "prob_rule": get("prob_rule"),
                "kl_mode": get("kl_mode"),
                "kl_reference": get("kl_reference"),
                "flag_threshold": get("flag_threshold"),
            },
        }
    )

    raw = ConfigLoader().load_raw(args.config) if args.config else {}
    data = merge_overrides(raw, overrides)
    data.setdefault("taus", list(COMMAND_TAUS[args.command]))
    if args.command in MAXRULE_COMMANDS:
        diagnose = dict(data.get("diagnose") or {})
        diagnose.setdefault("prob_rule", ProbRule.MAXRULE.value)
        data["diagnose"] = diagnose
    return RunManifest(**data)


# =============================================================================
# Commands
# =============================================================================


def _workers(manifest: RunManifest, tasks: int) -> int:
    """τ fan-out worker 수 (BQR_THREADS 없으면 τ당 1개)"""
    if manifest.workers is not None:
        return max(1, min(tasks, manifest.workers))
    return get_settings().worker_count(tasks)


def _pool_workers(manifest: RunManifest, tasks: int) -> int:
    """관측치 / replication fan-out worker 수 (명시되지 않으면 1)"""
    cap = manifest.workers or get_settings().threads or 1
    return max(1, min(tasks, cap))


def _load_input(manifest: RunManifest) -> Dataset:
    if manifest.input_path is None or manifest.response is None:
        raise DataIngestError(f"{manifest.command} requires --input and --response")
    return load_csv(manifest.input_path, manifest.response, manifest.intercept)


def _fit_all(manifest: RunManifest, data: Dataset) -> dict[float, PosteriorChains]:
    return fit_taus(
        data, manifest.fit, manifest.taus, workers=_workers(manifest, len(manifest.taus))
    )


def _write_draws(
    manifest: RunManifest, chains_by_tau: dict[float, PosteriorChains]
) -> list[Path]:
    if not manifest.write_draws:
        return []
    return [
        write_csv(chains.to_frame(), manifest.output_dir / f"draws_tau={tau_label(tau)}.csv")
        for tau, chains in chains_by_tau.items()
    ]


def cmd_fit(manifest: RunManifest) -> list[Path]:
    """
    τ별 적합 후 요약 저장

    Returns:
        저장된 파일 목록 (beta_summary.csv, sigma_summary.csv, [draws_tau=<τ>.csv])
    """
    data = _load_input(manifest)
    chains_by_tau = _fit_all(manifest, data)

    summaries = pd.concat(
        [summarize_chains(c, manifest.credible_level) for c in chains_by_tau.values()],
        ignore_index=True,
    )
    beta_summary = summaries[summaries["parameter"] != "sigma"].reset_index(drop=True)
    outputs = [
        write_csv(beta_summary, manifest.output_dir / "beta_summary.csv"),
        write_csv(
            sigma_curve(chains_by_tau, manifest.credible_level),
            manifest.output_dir / "sigma_summary.csv",
        ),
    ]
    outputs.extend(_write_draws(manifest, chains_by_tau))
    return outputs


def cmd_diagnose(manifest: RunManifest) -> list[Path]:
    """
    τ별 적합 후 관측치별 이상치 확률 / KL 저장

    Returns:
        저장된 파일 목록 (outliers_tau=<τ>.csv, [draws_tau=<τ>.csv])
    """
    data = _load_input(manifest)
    chains_by_tau = _fit_all(manifest, data)
    settings = manifest.diagnose

    outputs: list[Path] = []
    for tau, chains in chains_by_tau.items():
        report = build_report(
            chains,
            prob_rule=settings.prob_rule,
            kl_mode=settings.kl_mode,
            spec=settings.kde,
            kl_reference=settings.kl_reference,
            flag_threshold=settings.flag_threshold,
            workers=_pool_workers(manifest, chains.n),
        )
        top = top_outliers(report, k=3)
        logger.info(
            "Top outliers",
            tau=tau,
            rows=top["row_index"].tolist(),
            probabilities=[round(p, 4) for p in top["probability"]],
        )
        outputs.append(
            write_csv(report.to_frame(), manifest.output_dir / f"outliers_tau={tau_label(tau)}.csv")
        )
    outputs.extend(_write_draws(manifest, chains_by_tau))
    return outputs


def cmd_simulate(manifest: RunManifest) -> list[Path]:
    """
    시나리오 스터디 실행

    Returns:
        simulation_probabilities.csv, simulation_relative_kl.csv,
        simulation_betas.csv, simulation_replications.csv, simulation_failures.csv
    """
    summaries = []
    for scenario in manifest.scenarios:
        spec = ScenarioSpec.for_scenario(
            scenario,
            taus=manifest.taus,
            replications=manifest.replications,
            master_seed=manifest.seed,
            fit=manifest.fit,
            kde=manifest.diagnose.kde,
            prob_rule=manifest.diagnose.prob_rule,
        )
        summaries.append(run_study(spec, workers=_pool_workers(manifest, spec.replications)))

    out = manifest.output_dir
    frames = {
        "simulation_probabilities.csv": [s.probabilities for s in summaries],
        "simulation_relative_kl.csv": [s.relative_kl for s in summaries],
        "simulation_betas.csv": [s.betas for s in summaries],
        "simulation_replications.csv": [s.records for s in summaries],
        "simulation_failures.csv": [s.failures for s in summaries],
    }
    return [
        write_csv(pd.concat(parts, ignore_index=True), out / name)
        for name, parts in frames.items()
    ]


def cmd_calibrate(manifest: RunManifest) -> list[Path]:
    """
    이상치 없는 calibration 스터디 실행

    Returns:
        calibration_summary.csv, calibration_replications.csv,
        calibration_observations.csv, calibration_failures.csv
    """
    spec = CalibrationSpec(
        n_values=manifest.n_values,
        taus=manifest.taus,
        replications=manifest.replications,
        master_seed=manifest.seed,
        fit=manifest.fit,
        prob_rule=manifest.diagnose.prob_rule,
        flag_threshold=manifest.diagnose.flag_threshold,
    )
    summary = run_calibration_study(spec, workers=_pool_workers(manifest, spec.replications))
    out = manifest.output_dir
    return [
        write_csv(summary.summary, out / "calibration_summary.csv"),
        write_csv(summary.records, out / "calibration_replications.csv"),
        write_csv(summary.observations, out / "calibration_observations.csv"),
        write_csv(summary.failures, out / "calibration_failures.csv"),
    ]


def cmd_curve(manifest: RunManifest) -> list[Path]:
    """T(τ) 곡선 저장 (variance_curve.csv)"""
    return [write_csv(variance_curve(manifest.taus), manifest.output_dir / "variance_curve.csv")]


COMMANDS: dict[str, Callable[[RunManifest], list[Path]]] = {
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "curve": cmd_curve,
}


def run(manifest: RunManifest) -> list[Path]:
    """커맨드 실행 후 manifest.json 기록"""
    outputs = COMMANDS[manifest.command](manifest)
    manifest_path = manifest.output_dir / "manifest.json"
    write_manifest(
        {
            "version": __version__,
            "numpy_version": np.__version__,
            "run": manifest.model_dump(mode="json"),
            "outputs": [p.name for p in outputs],
        },
        manifest_path,
    )
    return [*outputs, manifest_path]


def _error_record(command: str, error: Exception) -> str:
    return json.dumps(
        {
            "status": "error",
            "command": command,
            "error_type": type(error).__name__,
            "message": str(error),
        },
        sort_keys=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """
    CLI 진입점

    Returns:
        exit status (0: 모든 출력 저장 완료, 1: 에러)
    """
    args = build_parser().parse_args(argv)

    stage = "config"
    try:
        set_log_level(args.log_level or get_settings().log_level)
        manifest = build_manifest(args)
        stage = "run"
        outputs = run(manifest)
    except (BQRError, ValidationError, ValueError, OSError) as e:
        logger.log_error(args.command, stage, e)
        print(_error_record(args.command, e), file=sys.stderr)
        return 1

    logger.info(
        "Command completed",
        command=manifest.command,
        outputs=len(outputs),
        output_dir=str(manifest.output_dir),
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
