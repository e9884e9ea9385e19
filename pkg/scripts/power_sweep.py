"""Outage probability against the relay to source power ratio."""

from _common import call, parser


def main():
    p = parser(__doc__)
    p.add_argument("--db", default="-30,-25,-20,-15,-10,-5,0,5")
    p.add_argument("--lambda-ratio", default="500")
    args = p.parse_args()
    for eps in (0.0, 0.5, 1.0):
        out = args.out_dir / f"power_eps{eps:g}.csv"
        call(args, "sweep", "--axis", "power_ratio_db", f"--values={args.db}",
             "--lambda-ratio", args.lambda_ratio, "--epsilon", str(eps), "--out", str(out))


if __name__ == "__main__":
    main()
