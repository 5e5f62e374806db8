"""Independent reference for tokenize / FNV-1a / hashed embeddings.

Regenerate with:  python3 tests/oracles/hash_oracle.py > tests/fixtures/hash_oracle.json
"""
import json
import math
import pathlib
import re

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def tokenize(text: str):
    return [t.lower() for t in re.findall(r"[A-Za-z]+", text)]


def hashed(tokens, dim, prefix="", bigrams=True, into=None):
    v = into if into is not None else [0.0] * dim
    for i, tok in enumerate(tokens):
        feats = [prefix + tok]
        if bigrams and i + 1 < len(tokens):
            feats.append(prefix + tok + "|" + tokens[i + 1])
        for f in feats:
            h = fnv1a64(f.encode())
            v[h % dim] += -1.0 if h >> 63 else 1.0
    return v


def normalize(v):
    sq = 0.0
    for x in v:
        sq += x * x
    if sq == 0.0:
        return list(v)
    inv = 1.0 / math.sqrt(sq)
    return [x * inv for x in v]


def main():
    root = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "render"
    fnv_inputs = ["", "a", "foobar", "cabinet", "s:window", "g:the|window"]
    token_inputs = [
        "top_cabinet_47 is dusty.",
        "",
        "cup1 is inside the cabinet",
        "For every cabinet, the following is NOT true: the cabinet is dusty.",
        "123 ___ 4a5B",
    ]
    embed_inputs = [
        ("top_cabinet_47 is dusty. bowl_0 is on top countertop_26.", 16, True),
        ("top_cabinet_47 is dusty. bowl_0 is on top countertop_26.", 16, False),
        ("For every window, the following is NOT true: the window is open.", 64, True),
        ("", 8, True),
    ]
    out = {
        "fnv1a64": [[s, format(fnv1a64(s.encode()), "016x")] for s in fnv_inputs],
        "tokenize": [[s, tokenize(s)] for s in token_inputs],
        "embed": [
            {"text": t, "dim": d, "bigrams": b,
             "vector": normalize(hashed(tokenize(t), d, bigrams=b))}
            for t, d, b in embed_inputs
        ],
        "featurize": [],
    }
    for name, dim in [("locking_every_window", 512), ("cleaning_kitchen_cupboard", 64)]:
        state = (root / f"{name}.state.txt").read_text().rstrip("\n")
        goal = (root / f"{name}.goal.txt").read_text().rstrip("\n")
        v = hashed(tokenize(state), dim, prefix="s:")
        v = hashed(tokenize(goal), dim, prefix="g:", into=v)
        out["featurize"].append(
            {"activity": name, "dim": dim, "vector": normalize(v)})
    out["descriptions"] = []
    for path in sorted(root.glob("*.state.txt")):
        name = path.name[: -len(".state.txt")]
        state = path.read_text().rstrip("\n")
        goal = (root / f"{name}.goal.txt").read_text().rstrip("\n")
        text = state + "\n" + goal
        out["descriptions"].append(
            {"activity": name, "dim": 256,
             "vector": normalize(hashed(tokenize(text), 256))})
    vecs = [d["vector"] for d in out["descriptions"]]
    out["similarity"] = [
        [sum(x * y for x, y in zip(a, b)) for b in vecs] for a in vecs]
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
