import argparse
import json
import logging
import sys
from typing import List, Optional

from qflow import __version__
from qflow.config import settings
from qflow.core.errors import QflowError
from qflow.models.error import ErrorReport
from qflow.utils.run_id import get_run_id, install_default_factory, run_context

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [run_id=%(run_id)s] - %(message)s"

install_default_factory()
logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(level=(level or settings.LOG_LEVEL).upper(), format=LOG_FORMAT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qflow",
        description="Simulate and verify regularized learning dynamics in quantum games",
    )
    parser.add_argument("--version", action="version", version=f"qflow {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides QFLOW_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="integrate the dynamics of a run manifest")
    simulate.add_argument("manifest", help="path to the run manifest (JSON)")

    diagnose = commands.add_parser("diagnose", help="run the diagnostics a manifest requests")
    diagnose.add_argument("manifest", help="path to the run manifest (JSON)")

    verify = commands.add_parser("verify", help="run the built-in oracle suite")
    verify.add_argument("--loose", action="store_true", help="multiply every oracle tolerance by 10")
    verify.add_argument("--only", metavar="NAME", default=None, help="run a single oracle")
    verify.add_argument("--seed", type=int, default=0, help="seed of the oracle sample sets")
    return parser


def cmd_simulate(args) -> int:
    from qflow.services.simulation_service import SimulationService

    run = SimulationService(args.manifest).run()
    print(json.dumps({"output_dir": run.output_dir, "files": run.files, "wall_time": run.wall_time}))
    return 0


def cmd_diagnose(args) -> int:
    from qflow.services.diagnostics_service import DiagnosticsService

    service = DiagnosticsService(args.manifest)
    reports = service.run()
    print(json.dumps({"output_dir": service.output_dir, "reports": sorted(reports)}))
    return 0


def cmd_verify(args) -> int:
    from qflow.services.verify_service import VerifyService

    results = VerifyService(loose=args.loose, seed=args.seed).run(only=args.only)
    width = max(len(r.name) for r in results)
    print(f"{'oracle':<{width}}  status  {'value':>10}  {'tolerance':>9}  time")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status:<6}  {r.value:>10.3e}  {r.tolerance:>9.1e}  {r.elapsed:.2f}s")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAILED {r.name}: {r.detail or 'tolerance exceeded'}")
    return 1 if failed else 0


COMMANDS = {
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "verify": cmd_verify,
}


def report_error(error_code: str, message: str, exit_code: int, detail: Optional[str] = None) -> None:
    report = ErrorReport(error_code=error_code, message=message, run_id=get_run_id(),
                         exit_code=exit_code, detail=detail)
    print(json.dumps(report.model_dump(exclude_none=True)), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    with run_context():
        logger.info(f"qflow {__version__} {args.command}")
        try:
            return COMMANDS[args.command](args)
        except QflowError as e:
            logger.error(f"{e.error_code}: {e.message}")
            report_error(e.error_code, e.message, e.exit_code, e.detail)
            return e.exit_code
        except Exception as e:
            logger.error(f"Unhandled exception: {e}", exc_info=True)
            report_error("INTERNAL_ERROR", "An unexpected error occurred", 1, detail=str(e))
            return 1


if __name__ == "__main__":
    sys.exit(main())
