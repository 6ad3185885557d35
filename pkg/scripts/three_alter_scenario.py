"""Replay the warmed three-alter scenario and print the last window's features."""
from egocontext.core import layer_of, AlterId, AlterKind
from egocontext.replay import replay
from egocontext.synth import three_alter_scenario_events


def main():
    rows, engines = replay(three_alter_scenario_events("u1"))
    net = engines["u1"].social_net.network
    for key in ("x1", "x2", "b", "c", "f1", "a"):
        print(f"{key:>3}: layer {layer_of(net, AlterId(AlterKind.PERSON, key))}")
    last = rows[-1]
    print("SC  =", [round(x, 6) for x in last.sc])
    print("FPP =", list(last.fpp))
    print("FPG =", list(last.fpg))


if __name__ == "__main__":
    main()
