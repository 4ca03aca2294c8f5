"""Three-machine nine-bus test system data (WSCC form, 100 MVA base).

Standard published network: three generator buses behind step-up
transformers feeding a 230 kV ring with loads at buses 5, 6 and 8.
The unit at bus 3 is omitted here; the study attaches a converter
plant at that bus instead.  Classical-model constants for the two
remaining machines are the usual values; the damping coefficient
stands in for the excitation and stabilizer hardware the classical
model omits, sized so post-fault swings settle within a few seconds.
"""

from __future__ import annotations

from .network import Branch, Bus, NetworkData, SynchronousMachine

MACHINE_DAMPING = 6.0


def wscc9_without_g3() -> NetworkData:
    """Nine-bus network with machines at buses 1 and 2 and bus 3 open for
    a plant connection (PQ bus, injection supplied by the caller)."""
    buses = [
        Bus(id=1, base_kv=16.5, btype="slack", v_set=1.04),
        Bus(id=2, base_kv=18.0, btype="pv", v_set=1.025, p_gen=1.63),
        Bus(id=3, base_kv=13.8, btype="pq"),
        Bus(id=4, base_kv=230.0),
        Bus(id=5, base_kv=230.0, p_load=1.25, q_load=0.50),
        Bus(id=6, base_kv=230.0, p_load=0.90, q_load=0.30),
        Bus(id=7, base_kv=230.0),
        Bus(id=8, base_kv=230.0, p_load=1.00, q_load=0.35),
        Bus(id=9, base_kv=230.0),
    ]
    branches = [
        Branch(from_bus=1, to_bus=4, r=0.0, x=0.0576, b=0.0),
        Branch(from_bus=2, to_bus=7, r=0.0, x=0.0625, b=0.0),
        Branch(from_bus=3, to_bus=9, r=0.0, x=0.0586, b=0.0),
        Branch(from_bus=4, to_bus=5, r=0.0100, x=0.0850, b=0.176),
        Branch(from_bus=4, to_bus=6, r=0.0170, x=0.0920, b=0.158),
        Branch(from_bus=5, to_bus=7, r=0.0320, x=0.1610, b=0.306),
        Branch(from_bus=6, to_bus=9, r=0.0390, x=0.1700, b=0.358),
        Branch(from_bus=7, to_bus=8, r=0.0085, x=0.0720, b=0.149),
        Branch(from_bus=8, to_bus=9, r=0.0119, x=0.1008, b=0.209),
    ]
    machines = [
        SynchronousMachine(bus=1, h=23.64, d=MACHINE_DAMPING, xd_p=0.0608),
        SynchronousMachine(bus=2, h=6.40, d=MACHINE_DAMPING, xd_p=0.1198),
    ]
    return NetworkData(name="wscc9-wpp", base_mva=100.0, frequency_hz=60.0,
                       buses=buses, branches=branches, machines=machines)
