import argparse
import os
import sys

# Ensure project root is on sys.path so imports work when running from scripts/
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from cointoss.archive import list_runs, load_artifact  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="List archived cointoss runs.")
    parser.add_argument("--limit", type=int, default=20)
    parser.add_argument("--command", help="only runs of this command")
    parser.add_argument("--artifact", type=int, metavar="RUN_ID",
                        help="print the stored artifact of one run instead")
    args = parser.parse_args()

    if args.artifact is not None:
        print(load_artifact(args.artifact) or "(no artifact stored)")
        return

    runs = list_runs(limit=args.limit, command=args.command)
    if not runs:
        print("No archived runs.")
        return
    for run in runs:
        checks = f" checks={run['checks']} failed={run['failed_checks']}" if run["checks"] else ""
        print(f"{run['id']:>5}  {run['created_at'] or '-':<19}  {run['command']:<16} "
              f"exit={run['exit_status']}{checks}  {run['summary'] or ''}")


if __name__ == "__main__":
    main()
