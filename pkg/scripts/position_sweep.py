"""Outage probability as the relays move from the destination (0) to the source (1)."""

from _common import call, parser


def main():
    p = parser(__doc__)
    p.add_argument("--values", default="0,0.25,0.5,0.75,1")
    args = p.parse_args()
    for n_r in (1, 2):
        out = args.out_dir / f"position_nr{n_r}.csv"
        call(args, "sweep", "--axis", "epsilon", f"--values={args.values}", "--n-r", str(n_r), "--out", str(out))


if __name__ == "__main__":
    main()
