"""Mesh every fixture scene to OBJ and print a volume cross-check.

Usage: python3 scripts/mesh_fixtures.py [--resolution N] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from midair.mesher import GridSpec, export_obj, mesh_volume, monte_carlo_volume, polygonize
from midair.sceneio import parse_scene

ROOT = Path(__file__).resolve().parent.parent
SCENES = sorted((ROOT / "fixtures" / "scenes").glob("*.json"))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--out", default=str(ROOT / "out"))
    args = ap.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in SCENES:
        scene = parse_scene(path.read_text())
        mesh = polygonize(scene, GridSpec(resolution=args.resolution))
        target = out_dir / (path.stem + ".obj")
        target.write_bytes(export_obj(mesh))
        mv = mesh_volume(mesh)
        mc = monte_carlo_volume(scene, samples=200_000, seed=0)
        print(
            f"{path.stem}: {mesh.triangle_count} triangles, "
            f"mesh volume {mv:.4f}, monte-carlo {mc:.4f} -> {target}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
