"""CLI: spinchain-plot <job.json> [more jobs...]; writes PNG and SVG."""

import argparse
import sys

from .jobs import load_job
from .render import InputError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spinchain-plot",
                                     description="Render figures from "
                                                 "spinchain output tables")
    parser.add_argument("jobs", nargs="+", metavar="job.json",
                        help="plot job description file(s)")
    args = parser.parse_args(argv)
    for path in args.jobs:
        try:
            job = load_job(path)
            written = render(job)
        except (InputError, ValueError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 1
        for out in written:
            print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
