"""
Boundaries against K
====================

Plot A* and B* over K for the cross-entropy, L1 and classic penalties from
CSV files written by ``seqtest sweep``. Requires matplotlib.

    seqtest sweep ce:1,1 --K-min 8.05 --K-max 100 --log --out ce.csv
    seqtest sweep l1 --K-min 8.05 --K-max 100 --log --out l1.csv
    seqtest sweep classic:1,1 --K-min 8.05 --K-max 100 --log --out classic.csv
    python3 demos/plot_boundaries.py ce.csv l1.csv classic.csv
"""
import sys

import matplotlib.pyplot as plt
import numpy as np

fig, ax = plt.subplots()
for path in sys.argv[1:]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    line, = ax.plot(data["K"], data["A"], label=path.rsplit(".", 1)[0])
    ax.plot(data["K"], data["B"], color=line.get_color())
ax.set_xscale("log")
ax.set_xlabel("K")
ax.set_ylabel("boundary")
ax.legend()
fig.savefig("boundaries.png", dpi=120)
print("wrote boundaries.png")
