#!/usr/bin/env python3
"""Regenerates the bundled robot descriptions in data/robots/.

Both models share one 7-DOF arm layout (3 shoulder, 1 elbow, 3 wrist joints).
At q = 0 the arms hang straight down. The right arm mirrors the left across the
x-z plane: axes are reflected and negated, so equal joint vectors give
mirror-symmetric positions.
"""
import json
import math
import os
import sys

IDENTITY = [1.0, 0.0, 0.0, 0.0]
FLIP_X = [0.0, 1.0, 0.0, 0.0]  # 180 deg about x: wrist z-axis points along the hand

# name, axis (left arm), limits
LEFT_JOINTS = [
    ("shoulder_pitch", [0, -1, 0], [-1.0, 2.8]),
    ("shoulder_roll", [1, 0, 0], [-0.6, 2.5]),
    ("shoulder_yaw", [0, 0, 1], [-2.2, 2.2]),
    ("elbow", [0, -1, 0], [0.0, 2.6]),
    ("forearm_roll", [0, 0, 1], [-2.6, 2.6]),
    ("wrist_pitch", [0, 1, 0], [-1.5, 1.5]),
    ("wrist_yaw", [1, 0, 0], [-1.5, 1.5]),
]


def mirror_axis(a):
    # reflect through the x-z plane, then negate (reflection flips handedness)
    return [-a[0], a[1], -a[2]]


def pose(p=(0, 0, 0), q=IDENTITY):
    return {"position": [float(v) for v in p], "orientation": list(q)}


def arm(side, p):
    sign = 1.0 if side == "left" else -1.0
    prefix = "l_" if side == "left" else "r_"
    joints = []
    for i, (name, axis, lim) in enumerate(LEFT_JOINTS):
        if i == 3:
            origin = (0, 0, -p["upper"])
        elif i == 4:
            origin = (0, 0, -p["fore"])
        else:
            origin = (0, 0, 0)
        ax = axis if side == "left" else mirror_axis(axis)
        joints.append({"name": prefix + name, "origin": pose(origin),
                       "axis": [float(v) for v in ax], "limits": lim})
    frames = {
        "shoulder": {"joint": 0, "offset": pose()},
        "elbow": {"joint": 3, "offset": pose()},
        "wrist": {"joint": 6, "offset": pose((0, 0, 0), FLIP_X)},
        "hand_tip": {"joint": 6, "offset": pose((0, 0, -p["hand"]), FLIP_X)},
    }
    return {"base": pose((p.get("shoulder_x", 0.0), sign * p["shoulder_y"], 0.0)),
            "joints": joints, "frames": frames}


def capsules(p):
    caps = []
    for c in p["body"]:
        caps.append({"name": c[0], "owner": "body", "link": -1, "a": c[1], "b": c[2], "radius": c[3]})
    for side in ("left", "right"):
        s = side[0]
        caps.append({"name": s + "_upper_arm", "owner": side, "link": 2,
                     "a": [0, 0, -0.06], "b": [0, 0, -(p["upper"] - 0.04)], "radius": p["r_upper"]})
        caps.append({"name": s + "_forearm", "owner": side, "link": 3,
                     "a": [0, 0, -0.04], "b": [0, 0, -(p["fore"] - 0.03)], "radius": p["r_fore"]})
        # link 6 frame still has z along the forearm; the hand extends along -z
        caps.append({"name": s + "_hand", "owner": side, "link": 6,
                     "a": [0, 0, -0.03], "b": [0, 0, -(p["hand"] - p["r_hand"])], "radius": p["r_hand"]})
    return caps


def pairs(p):
    out = []
    for b in p["body"]:
        for s in ("l", "r"):
            out += [[b[0], s + "_forearm"], [b[0], s + "_hand"]]
    out += [["l_forearm", "r_forearm"], ["l_forearm", "r_hand"], ["l_hand", "r_forearm"],
            ["l_hand", "r_hand"], ["l_upper_arm", "r_forearm"], ["l_upper_arm", "r_hand"],
            ["r_upper_arm", "l_forearm"], ["r_upper_arm", "l_hand"], ["l_upper_arm", "r_upper_arm"],
            ["l_hand", "l_upper_arm"], ["r_hand", "r_upper_arm"]]
    return out


def fingers(side):
    names = ["thumb_bend", "thumb_rot", "index", "middle", "ring", "little"]
    lims = [[0.0, 0.6], [0.0, 1.3], [0.0, 1.7], [0.0, 1.7], [0.0, 1.7], [0.0, 1.7]]
    return [{"name": side[0] + "_" + n, "limits": l} for n, l in zip(names, lims)]


def model(name, p, note):
    return {
        "name": name,
        "note": note,
        "hand_length": p["hand"],
        "arms": {"left": arm("left", p), "right": arm("right", p)},
        "capsules": capsules(p),
        "collision_pairs": pairs(p),
        "fingers": {"left": fingers("left"), "right": fingers("right")},
    }


REFERENCE = {
    "shoulder_y": 0.20, "upper": 0.30, "fore": 0.26, "hand": 0.18,
    "r_upper": 0.045, "r_fore": 0.04, "r_hand": 0.035,
    "body": [["torso", [-0.03, 0.0, -0.05], [-0.03, 0.0, -0.50], 0.12]],
}

COMPACT = {
    "shoulder_y": 0.15, "upper": 0.21, "fore": 0.23, "hand": 0.12,
    "r_upper": 0.04, "r_fore": 0.035, "r_hand": 0.03,
    "body": [["torso", [0.0, 0.0, -0.02], [0.0, 0.0, -0.50], 0.09],
             ["chest", [0.05, -0.07, -0.20], [0.05, 0.07, -0.20], 0.11]],
}


def main():
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "robots")
    os.makedirs(root, exist_ok=True)
    docs = {
        "reference_dual_arm.json": model(
            "reference_dual_arm", REFERENCE,
            "Human-proportioned 7-DOF arms. Capsule radii are a modeling choice, not measured geometry."),
        "compact_dual_arm.json": model(
            "compact_dual_arm", COMPACT,
            "Smaller-reach arms on narrow shoulders with a bulky chest. Capsule radii are a modeling choice."),
    }
    for fname, doc in docs.items():
        with open(os.path.join(root, fname), "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
