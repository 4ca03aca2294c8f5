"""Regenerate the canonical scenario files in scenarios/.

The three shipped studies are defined programmatically; this script
serializes them so the text files never drift from the builders.  Run it
after changing any default parameter:

    python3 scripts/make_scenarios.py [--out-dir scenarios]
"""

import argparse
from pathlib import Path

from windcosim.scenario import build_large_scale, build_monolithic, build_small_scale
from windcosim.scenario_io import parse_scenario, write_scenario

BUILDERS = {
    "monolithic.scn": build_monolithic,
    "small_scale.scn": build_small_scale,
    "large_scale.scn": build_large_scale,
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default=Path(__file__).resolve().parents[1] / "scenarios",
                        type=Path)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for name, build in BUILDERS.items():
        path = args.out_dir / name
        scenario = build()
        write_scenario(scenario, path)
        # guard against a file that does not survive its own round trip
        back = parse_scenario(path)
        assert back == scenario, f"{name} does not round-trip"
        print(f"wrote {path} ({len(scenario.component_ids())} components, "
              f"t_end {scenario.master.t_end:g} s)")


if __name__ == "__main__":
    main()
