"""Outage probability against relay density, for 1 to 3 relays and both relay positions."""

from _common import call, parser


def main():
    p = parser(__doc__)
    p.add_argument("--ratios", default="10,20,50,100,200,500,1000")
    args = p.parse_args()
    for n_r in (1, 2, 3):
        for eps in (0.0, 1.0):
            out = args.out_dir / f"density_nr{n_r}_eps{eps:g}.csv"
            call(args, "sweep", "--axis", "lambda_ratio", f"--values={args.ratios}",
                 "--n-r", str(n_r), "--epsilon", str(eps), "--out", str(out))


if __name__ == "__main__":
    main()
