"""Outage probability of NNC and MNNC over the compression noise grid."""

from _common import call, parser


def main():
    p = parser(__doc__)
    p.add_argument("--grid", default="1e-8,1e-7,1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1")
    args = p.parse_args()
    for eps in (0.0, 1.0):
        out = args.out_dir / f"nc_eps{eps:g}.csv"
        call(args, "optimize-nc", f"--grid={args.grid}", "--protocols", "NNC,MNNC",
             "--epsilon", str(eps), "--out", str(out))


if __name__ == "__main__":
    main()
