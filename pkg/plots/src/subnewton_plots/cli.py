"""Command line entry point: plot <artifact-dir> <figure-spec> -o <dir>."""

import argparse
import sys

from .figspec import SpecError, load_figure_specs
from .render import ArtifactError, render

EXIT_OK = 0
EXIT_ERROR = 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="subnewton-plot",
        description="Render figures from a subnewton artifact directory")
    parser.add_argument("artifact_dir")
    parser.add_argument("figure_spec")
    parser.add_argument("-o", "--output", required=True,
                        help="directory for the rendered images")
    args = parser.parse_args(argv)
    try:
        specs = load_figure_specs(args.figure_spec)
        written = render(args.artifact_dir, specs, args.output)
    except (SpecError, ArtifactError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
