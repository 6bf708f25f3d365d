"""``python -m t2vqa_provider`` / ``t2vqa-provider``: run the service."""

from __future__ import annotations

import argparse
import sys

from t2vqa_provider.server import MODES, make_server


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="t2vqa-provider",
        description="Serve the caption/embed/class_probs HTTP endpoints.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8741)
    parser.add_argument("--mode", choices=MODES, default="stub")
    parser.add_argument("--seed", type=int, default=0,
                        help="stub-mode hash seed (ignored in live mode)")
    parser.add_argument("--embed-dim", type=int, default=64)
    parser.add_argument("--classes", type=int, default=1000)
    args = parser.parse_args(argv)

    server = make_server(port=args.port, mode=args.mode, seed=args.seed,
                         embed_dim=args.embed_dim, classes=args.classes,
                         host=args.host)
    host, port = server.server_address[:2]
    print(f"serving {args.mode} provider on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
