import argparse
import sys

from .export import ExportSpec, export_word_embeddings


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="encoder-export",
        description="export type-level word embeddings to a .vec file")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export")
    p.add_argument("--model", required=True,
                   help="model identifier or local checkpoint directory")
    p.add_argument("--words", required=True,
                   help="wordlist, one word per line")
    p.add_argument("--out", required=True, help="output .vec path")
    p.add_argument("--batch", type=int, default=64)
    args = parser.parse_args(argv)

    try:
        written, skipped = export_word_embeddings(ExportSpec(
            model=args.model, words_path=args.words, out_path=args.out,
            batch_size=args.batch))
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {written} vectors ({skipped} words skipped) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
