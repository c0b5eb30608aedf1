#!/usr/bin/env python3
"""Convert a citation/co-purchase .npz (amazon_electronics_photo.npz, cora_ml.npz)
into the gnndiag dataset JSON.

The adjacency is symmetrized and self loops dropped.  Use --lcc to keep only the
largest connected component.  A class-balanced split is drawn here; redraw it
with `gnndiag ingest --split-train` if you want the C++ seed scheme.
"""

import argparse
import json
import sys

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


def load_npz(path):
    with np.load(path, allow_pickle=True) as f:
        f = dict(f)
    adj = sp.csr_matrix((f["adj_data"], f["adj_indices"], f["adj_indptr"]), shape=tuple(f["adj_shape"]))
    if "attr_data" in f:
        x = sp.csr_matrix((f["attr_data"], f["attr_indices"], f["attr_indptr"]), shape=tuple(f["attr_shape"]))
    else:
        x = sp.csr_matrix(f["attr_matrix"])
    labels = np.asarray(f["labels"]).astype(np.int64)
    class_names = None
    if "class_names" in f:
        class_names = [str(c) for c in f["class_names"].tolist()]
    return adj, x, labels, class_names


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("npz")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--lcc", action="store_true", help="keep the largest connected component only")
    ap.add_argument("--train-per-class", type=int, default=20)
    ap.add_argument("--validation-per-class", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    adj, x, labels, class_names = load_npz(args.npz)
    adj = ((adj + adj.T) > 0).astype(np.int8).tocsr()
    adj.setdiag(0)
    adj.eliminate_zeros()

    keep = np.arange(adj.shape[0])
    if args.lcc:
        _, comp = connected_components(adj, directed=False)
        keep = np.flatnonzero(comp == np.bincount(comp).argmax())
        adj = adj[keep][:, keep].tocsr()
        x = x[keep]
        labels = labels[keep]

    # relabel so every class id in [0, C) is used
    present = np.unique(labels)
    remap = {int(c): i for i, c in enumerate(present)}
    labels = np.array([remap[int(c)] for c in labels], dtype=np.int64)
    if class_names is not None:
        class_names = [class_names[int(c)] for c in present]

    x = x.tocoo()
    top = x.data.max() if x.nnz else 0.0
    if x.nnz and (x.data.min() < 0 or top > 1):
        print("features outside [0,1]; scaling by the maximum", file=sys.stderr)
        x.data = np.clip(x.data / top, 0.0, 1.0)

    rng = np.random.default_rng(args.seed)
    train, val, test = [], [], []
    for c in range(len(present)):
        ids = rng.permutation(np.flatnonzero(labels == c))
        a, b = args.train_per_class, args.train_per_class + args.validation_per_class
        train += ids[:a].tolist()
        val += ids[a:b].tolist()
        test += ids[b:].tolist()

    upper = sp.triu(adj, k=1).tocoo()
    doc = {
        "format": "gnndiag-dataset/1",
        "nodes": int(adj.shape[0]),
        "class_count": len(present),
        "edges": [[int(u), int(v)] for u, v in zip(upper.row, upper.col)],
        "features": {
            "dim": int(x.shape[1]),
            "sparse": [[int(r), int(c), float(v)] for r, c, v in zip(x.row, x.col, x.data) if v != 0],
        },
        "labels": labels.tolist(),
        "masks": {"train": sorted(train), "validation": sorted(val), "test": sorted(test)},
    }
    if class_names is not None:
        doc["class_names"] = class_names
    with open(args.out, "w") as out:
        json.dump(doc, out)
    print(f"{doc['nodes']} nodes, {len(doc['edges'])} edges, {doc['class_count']} classes -> {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
