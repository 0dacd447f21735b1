"""Module runner: `python -m mpcfigures.run <family> --in ... --out ...`.

Mirrors the installed fig-* console commands for environments where the
entry points are not on PATH.
"""

import sys

from . import cli

FAMILIES = {
    "regret-disturbance": cli.regret_disturbance,
    "regret-all": cli.regret_all,
    "per-step": cli.per_step,
    "table-mean-disturbance": cli.table_mean_disturbance,
    "table-mean-all": cli.table_mean_all,
    "table-std": cli.table_std,
    "nn-error": cli.nn_error,
    "nn-regret": cli.nn_regret,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] not in FAMILIES:
        print(f"usage: python -m mpcfigures.run {{{'|'.join(FAMILIES)}}} "
              "--in CSV --out IMAGE", file=sys.stderr)
        return 2
    return FAMILIES[argv[0]](argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
