"""Direct transmission Monte Carlo against the closed form."""

from _common import call, parser


def main():
    args = parser(__doc__, trials=100_000).parse_args()
    call(args, "validate-dt")


if __name__ == "__main__":
    main()
