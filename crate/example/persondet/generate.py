#!/usr/bin/env python3
"""Regenerates the synthetic CSV inputs of the person-detector bundle.

Deterministic (fixed seeds). The evaluation scores and study readings are
synthetic stand-ins for data that was never published; only the cohort
composition (24 male / 14 female; 18 light / 15 medium / 5 dark) and the
study design (3 sensors, 4 lighting levels, 3 distances, 10 readings) are
taken from the reference study.
"""
import random

def eval_csv():
    rng = random.Random(7)
    rows = []
    for i in range(400):
        label = 1 if i % 2 == 0 else 0
        mu = 0.68 if label else 0.34
        score = min(1.0, max(0.0, rng.gauss(mu, 0.16)))
        rows.append(f"{score:.4f},{label}")
    with open("eval.csv", "w", newline="\n") as f:
        f.write("score,label\n" + "\n".join(rows) + "\n")

def participants():
    genders = ["male"] * 24 + ["female"] * 14
    tones = sorted(([0, 1, 2, 3, 4] * 4)[:18]) + [5, 6, 7] * 5 + [8, 9, 10, 8, 9]
    rng = random.Random(11)
    rng.shuffle(genders)
    out = []
    for i, (g, mst) in enumerate(zip(genders, tones)):
        out.append((f"P{i + 1:02d}", g, mst))
    return out

LIGHTING = [(0, 0), (208, 31), (584, 51), (1149, 59)]
DISTANCES = [1, 3, 5]
SENSORS = ["S1", "S2", "S3"]

def readings(people):
    rng = random.Random(23)
    rows = []
    for pid, gender, mst in people:
        tone_shift = 0.0 if mst <= 4 else (-0.03 if mst <= 7 else -0.08)
        for lux, spread in LIGHTING:
            light_shift = -0.12 if lux == 0 else 0.0
            measured = lux if lux == 0 else round(lux + rng.uniform(-spread, spread))
            for d in DISTANCES:
                dist_shift = {1: 0.0, 3: -0.04, 5: -0.15}[d]
                for sensor in SENSORS:
                    sensor_shift = {"S1": 0.0, "S2": -0.01, "S3": 0.01}[sensor]
                    base = 0.86 + tone_shift + light_shift + dist_shift + sensor_shift
                    for _ in range(10):
                        p = min(1.0, max(0.0, rng.gauss(base, 0.05)))
                        raw = int(p * 255 + 0.5)
                        rows.append(f"{pid},{sensor},{measured},{d},{raw}")
    with open("readings.csv", "w", newline="\n") as f:
        f.write("participant_id,sensor_id,lighting_lux,distance_m,confidence_byte\n" + "\n".join(rows) + "\n")

if __name__ == "__main__":
    eval_csv()
    people = participants()
    with open("participants.csv", "w", newline="\n") as f:
        f.write("id,gender,mst\n" + "".join(f"{p},{g},{m}\n" for p, g, m in people))
    readings(people)
