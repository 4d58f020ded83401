#!/usr/bin/env python3
"""Build the fixture site into ./out and print how to serve it.

Usage:
    python scripts/build_demo_site.py [outdir]
"""

import sys
from pathlib import Path

from ald.site_builder import SiteConfig, build

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "out"
    frontend_dist = ROOT / "frontend" / "dist"
    config = SiteConfig(
        source_dir=ROOT / "fixtures" / "site",
        output_dir=outdir,
        manifest_path=ROOT / "fixtures" / "tools.json",
        default_tool_id="mock_analyzer",
        assets_dir=frontend_dist if frontend_dist.exists() else None,
    )
    report = build(config)
    print(f"built {report.pages_built} page(s) into {outdir}")
    if not frontend_dist.exists():
        print("note: frontend/dist not found, pages ship the placeholder runtime")
        print("      (cd frontend && npm run build) then rebuild for interactive cells")
    print(f"next: python -m ald serve {outdir} --port 8000")
    return 0


if __name__ == "__main__":
    sys.exit(main())
