"""Three-state Potts model on Z^2: expansion terms for P(omega(0) = 1)."""
from clustergibbs import CylinderEvent, build_potts, graphkit
from clustergibbs.expansion import thermodynamic_probability


def main():
    lam = float(graphkit.lambda0(2, 1))
    model = build_potts(2, lam, 3, [1.0, -0.5])
    A = CylinderEvent.make([(0, 0)], [{(0, 0): [1]}])
    rep = thermodynamic_probability(model, A, 3)
    for row in rep.rows():
        print(row)
    print("partial sum", rep.partial_sum, "tail", rep.tail_bound)


if __name__ == "__main__":
    main()
