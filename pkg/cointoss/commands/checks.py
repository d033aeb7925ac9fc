"""verify and schema."""
from cointoss import emit
from cointoss.commands import CommandResult
from cointoss.config import config_schema
from cointoss.verify import REGISTRY, run_verify_suite


def register(subparsers, common) -> None:
    verify = subparsers.add_parser("verify", parents=[common], help="run every registered check")
    verify.add_argument("--check", dest="checks", action="append", choices=sorted(REGISTRY),
                        help="run only this check (repeatable)")
    verify.add_argument("--enumeration-depth", dest="enumeration_depth", type=int)
    verify.set_defaults(handler=run_verify)

    schema = subparsers.add_parser("schema", parents=[common], help="print the RunConfig schema")
    schema.set_defaults(handler=run_schema)


def run_verify(args, config) -> CommandResult:
    report = run_verify_suite(config, getattr(args, "checks", None))
    emit.write_json(report, config.output)
    return CommandResult(0 if report.passed else 1, report.summary(), artifact=report,
                         report=report)


def run_schema(args, config) -> CommandResult:
    emit.write_json(config_schema(), config.output)
    return CommandResult(0, "schema: RunConfig JSON schema written")
