"""Regenerate the bundled 512-node AS stand-in edge list."""

import sys
from pathlib import Path

from netheal.presets import AS_SURROGATE_FILE, AS_SURROGATE_SEED, generate_as_surrogate
from netheal.topology import write_edge_list

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "src" / "netheal" / "data" / AS_SURROGATE_FILE
g = generate_as_surrogate()
write_edge_list(g, out, [f"synthetic AS stand-in, generate_as_surrogate(seed={AS_SURROGATE_SEED})"])
print(f"wrote {out}: {g.number_of_nodes()} nodes, {g.number_of_edges()} edges, diameter {g.diameter()}")
