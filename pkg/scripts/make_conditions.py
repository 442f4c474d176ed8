"""Write the sixteen built-in traffic conditions as scenario JSON files.

Rates are per entrance lane in vehicles per time unit, columns in the order
0-L 1-L 2-L 3-L 0-S 1-S 2-S 3-S. Time-varying conditions ramp linearly from
their first row to their second row over the horizon.
"""
import json
from pathlib import Path

FLOWS = ("0-L", "1-L", "2-L", "3-L", "0-S", "1-S", "2-S", "3-S")
HORIZON = 100_000

STEADY = {
    "C1": (0.102, 0.097, 0.092, 0.123, 0.118, 0.108, 0.108, 0.125),
    "C2": (0.156, 0.099, 0.143, 0.102, 0.176, 0.111, 0.180, 0.108),
    "C3": (0.067, 0.074, 0.068, 0.068, 0.178, 0.149, 0.158, 0.169),
    "C4": (0.057, 0.111, 0.069, 0.121, 0.154, 0.199, 0.142, 0.212),
    "C5": (0.178, 0.165, 0.189, 0.215, 0.199, 0.212, 0.203, 0.222),
    "C6": (0.181, 0.121, 0.243, 0.132, 0.209, 0.131, 0.255, 0.143),
    "C7": (0.132, 0.114, 0.117, 0.108, 0.251, 0.232, 0.223, 0.209),
    "C8": (0.101, 0.188, 0.098, 0.200, 0.198, 0.287, 0.216, 0.320),
}

# (start, end) rates; each varying condition ramps between two rows
VARYING = {
    "C9": ((0.089, 0.102, 0.103, 0.077, 0.112, 0.108, 0.131, 0.105),
           (0.178, 0.177, 0.190, 0.168, 0.198, 0.189, 0.179, 0.170)),
    "C10": ((0.057, 0.066, 0.072, 0.072, 0.080, 0.066, 0.073, 0.081),
            (0.224, 0.232, 0.189, 0.250, 0.200, 0.240, 0.232, 0.255)),
    "C11": ((0.156, 0.078, 0.123, 0.050, 0.158, 0.089, 0.149, 0.101),
            (0.223, 0.182, 0.189, 0.132, 0.240, 0.194, 0.278, 0.201)),
    "C12": ((0.101, 0.058, 0.097, 0.034, 0.125, 0.077, 0.102, 0.073),
            (0.242, 0.179, 0.199, 0.155, 0.252, 0.177, 0.280, 0.156)),
    "C13": ((0.101, 0.097, 0.108, 0.099, 0.159, 0.188, 0.180, 0.176),
            (0.158, 0.135, 0.138, 0.160, 0.277, 0.256, 0.280, 0.310)),
    "C14": ((0.057, 0.077, 0.079, 0.100, 0.140, 0.161, 0.151, 0.130),
            (0.158, 0.170, 0.120, 0.155, 0.300, 0.341, 0.400, 0.299)),
    "C15": ((0.055, 0.089, 0.048, 0.100, 0.121, 0.189, 0.148, 0.210),
            (0.101, 0.151, 0.078, 0.162, 0.178, 0.298, 0.210, 0.250)),
    "C16": ((0.055, 0.102, 0.077, 0.134, 0.160, 0.205, 0.144, 0.245),
            (0.158, 0.189, 0.176, 0.188, 0.298, 0.315, 0.298, 0.341)),
}


def scenario(name, schedule):
    return {
        "name": name,
        "horizon": HORIZON,
        "time_unit_seconds": 0.5,
        "detector_cap": 20,
        "discharge_headway": 1,
        "rng_seed": 0,
        "rate_schedule": schedule,
    }


def main(out=Path(__file__).resolve().parents[1] / "src/roundabout_ftc/data/conditions"):
    out.mkdir(parents=True, exist_ok=True)
    for name, rates in STEADY.items():
        sched = {f: [[0.0, r]] for f, r in zip(FLOWS, rates)}
        (out / f"{name}.json").write_text(json.dumps(scenario(name, sched), indent=2) + "\n")
    for name, (start, end) in VARYING.items():
        sched = {f: [[0.0, a], [float(HORIZON), b]] for f, a, b in zip(FLOWS, start, end)}
        (out / f"{name}.json").write_text(json.dumps(scenario(name, sched), indent=2) + "\n")


if __name__ == "__main__":
    main()
