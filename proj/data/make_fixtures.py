"""Regenerates the packaged CSV fixtures. Output is deterministic."""
import datetime
import math
import random

START = datetime.datetime(2020, 1, 1)
STEP = datetime.timedelta(minutes=30)
HEADER = "area_nm,measure_dt,TSP,SOx,NOx\n"


def stamp(t):
    return (START + t * STEP).strftime("%Y-%m-%d %H:%M")


def sine_fixture(path, n=1000, period=48):
    """Noiseless NOx = 1 + sin(2 pi t / period) on a complete grid."""
    with open(path, "w") as f:
        f.write(HEADER)
        for t in range(n):
            nox = 1 + math.sin(2 * math.pi * t / period)
            sox = 1 + math.cos(2 * math.pi * t / period)
            f.write(f"fixture,{stamp(t)},2,{sox!r},{nox!r}\n")


def station_sample(path, n=2000, seed=7):
    """Correlated noisy pollutants with dropped rows, blank cells and junk."""
    rng = random.Random(seed)
    nox_prev = 20.0
    with open(path, "w") as f:
        f.write(HEADER)
        for t in range(n):
            daily = math.sin(2 * math.pi * t / 48)
            sox = max(0.0, 10 + 3 * daily + rng.gauss(0, 1.5))
            tsp = max(0.0, 30 + 5 * daily + rng.gauss(0, 4))
            nox_prev = 0.8 * nox_prev + 0.2 * (20 + 1.5 * (sox - 10) + 4 * daily) + rng.gauss(0, 1)
            cells = [f"{tsp:.1f}", f"{sox:.2f}", f"{max(0.0, nox_prev):.2f}"]
            if rng.random() < 0.01:
                continue  # row never transmitted
            for k in range(3):
                if rng.random() < 0.05:
                    cells[k] = ""
            if rng.random() < 0.002:
                cells[2] = "-999"
            if rng.random() < 0.002:
                cells[1] = "n/a"
            f.write(f"station-A,{stamp(t)},{','.join(cells)}\n")


if __name__ == "__main__":
    sine_fixture("sine_fixture.csv")
    station_sample("station_sample.csv")
