#!/usr/bin/env python3
"""Writes the test corpus: nets under corpus/nets and MCC property files under corpus/properties.

Usage: tools/gen_corpus.py [output-dir]   (default: corpus/ next to this script's parent)
"""

import os
import sys
from xml.sax.saxutils import escape


class Net:
    def __init__(self, name, fmt="net"):
        self.name = name
        self.fmt = fmt
        self.places = []  # (name, tokens)
        self.transitions = []  # (name, [(place, w)], [(place, w)])

    def pl(self, name, tokens=0):
        self.places.append((name, tokens))
        return self

    def tr(self, name, pre, post):
        self.transitions.append((name, list(pre), list(post)))
        return self

    def text(self):
        out = [f"net {self.name}"]
        for p, m in self.places:
            out.append(f"pl {p} ({m})")
        for t, pre, post in self.transitions:
            arcs = lambda xs: " ".join(p if w == 1 else f"{p}*{w}" for p, w in xs)
            out.append(f"tr {t} {arcs(pre)} -> {arcs(post)}".replace("  ", " "))
        return "\n".join(out) + "\n"

    def pnml(self):
        out = ['<?xml version="1.0" encoding="utf-8"?>',
               '<pnml xmlns="http://www.pnml.org/version-2009/grammar/pnml">',
               f'  <net id="{self.name}" type="http://www.pnml.org/version-2009/grammar/ptnet">',
               f'    <name><text>{self.name}</text></name>',
               '    <page id="page0">']
        for p, m in self.places:
            out.append(f'      <place id="{p}"><name><text>{p}</text></name>'
                       + (f'<initialMarking><text>{m}</text></initialMarking>' if m else '') + '</place>')
        for t, _, _ in self.transitions:
            out.append(f'      <transition id="{t}"><name><text>{t}</text></name></transition>')
        n = 0
        for t, pre, post in self.transitions:
            for p, w in pre:
                n += 1
                ins = f'<inscription><text>{w}</text></inscription>' if w != 1 else ''
                out.append(f'      <arc id="a{n}" source="{p}" target="{t}">{ins}</arc>')
            for p, w in post:
                n += 1
                ins = f'<inscription><text>{w}</text></inscription>' if w != 1 else ''
                out.append(f'      <arc id="a{n}" source="{t}" target="{p}">{ins}</arc>')
        out += ['    </page>', '  </net>', '</pnml>']
        return "\n".join(out) + "\n"


# Formula builders producing MCC XML fragments.

def tokens(*places):
    return "<tokens-count>" + "".join(f"<place>{p}</place>" for p in places) + "</tokens-count>"

def const(n):
    return f"<integer-constant>{n}</integer-constant>"

def _num(x):
    return const(x) if isinstance(x, int) else x

def cmp(op, a, b):
    return f"<integer-{op}>{_num(a)}{_num(b)}</integer-{op}>"

def le(a, b): return cmp("le", a, b)
def ge(a, b): return cmp("ge", a, b)
def eq(a, b): return cmp("eq", a, b)
def lt(a, b): return cmp("lt", a, b)
def gt(a, b): return cmp("gt", a, b)
def ne(a, b): return cmp("ne", a, b)
def isum(*xs): return "<integer-sum>" + "".join(map(_num, xs)) + "</integer-sum>"
def diff(a, b): return f"<integer-difference>{_num(a)}{_num(b)}</integer-difference>"
def prod(k, x): return f"<integer-product>{_num(k)}{_num(x)}</integer-product>"
def conj(*xs): return "<conjunction>" + "".join(xs) + "</conjunction>"
def disj(*xs): return "<disjunction>" + "".join(xs) + "</disjunction>"
def neg(x): return f"<negation>{x}</negation>"
def imply(a, b): return f"<imply>{a}{b}</imply>"
def fire(*ts): return "<is-fireable>" + "".join(f"<transition>{t}</transition>" for t in ts) + "</is-fireable>"
def dead(): return "<is-deadlock/>"
def true(): return "<true/>"

def EF(x): return ("EF", x)
def AG(x): return ("AG", x)


def properties_xml(net_name, queries):
    out = ['<?xml version="1.0"?>', '<property-set xmlns="http://mcc.lip6.fr/">']
    for i, (q, body) in enumerate(queries):
        path, temporal = ("exists-path", "finally") if q == "EF" else ("all-paths", "globally")
        out.append("  <property>")
        out.append(f"    <id>{escape(net_name)}-{i:02d}</id>")
        out.append(f"    <description>{q}</description>")
        out.append(f"    <formula><{path}><{temporal}>{body}</{temporal}></{path}></formula>")
        out.append("  </property>")
    out.append("</property-set>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Nets

def net_a():
    return Net("NET-A").pl("p", 1).pl("q").tr("t", [("p", 1)], [("q", 1)])

def net_b():
    return Net("NET-B").pl("p", 1).tr("t", [("p", 1)], [("p", 2)])

def net_c():
    return Net("NET-C").pl("a", 1).pl("b").tr("t1", [("a", 1)], [("b", 1)]).tr("t2", [("b", 1)], [("a", 1)])

def net_d():
    return Net("NET-D").pl("a", 1).pl("b").tr("t1", [("a", 1), ("b", 1)], [("b", 1)])

def philosophers(n, fmt="net"):
    net = Net(f"philo{n}", fmt)
    for i in range(n):
        net.pl(f"think{i}", 1).pl(f"fork{i}", 1).pl(f"left{i}").pl(f"eat{i}")
    for i in range(n):
        j = (i + 1) % n
        net.tr(f"takeL{i}", [(f"think{i}", 1), (f"fork{i}", 1)], [(f"left{i}", 1)])
        net.tr(f"takeR{i}", [(f"left{i}", 1), (f"fork{j}", 1)], [(f"eat{i}", 1)])
        net.tr(f"release{i}", [(f"eat{i}", 1)], [(f"think{i}", 1), (f"fork{i}", 1), (f"fork{j}", 1)])
    return net

def producer_consumer(capacity):
    net = Net(f"prodcons{capacity}")
    net.pl("pidle", 1).pl("pready").pl("buffer").pl("free", capacity).pl("cidle", 1).pl("cbusy")
    net.tr("produce", [("pidle", 1)], [("pready", 1)])
    net.tr("put", [("pready", 1), ("free", 1)], [("pidle", 1), ("buffer", 1)])
    net.tr("get", [("cidle", 1), ("buffer", 1)], [("cbusy", 1), ("free", 1)])
    net.tr("consume", [("cbusy", 1)], [("cidle", 1)])
    return net

def producer_consumer_unbounded():
    net = Net("prodcons-inf")
    net.pl("pidle", 1).pl("buffer").pl("cidle", 1).pl("cbusy")
    net.tr("produce", [("pidle", 1)], [("pidle", 1), ("buffer", 1)])
    net.tr("get", [("cidle", 1), ("buffer", 1)], [("cbusy", 1)])
    net.tr("consume", [("cbusy", 1)], [("cidle", 1)])
    return net

def mutex():
    net = Net("mutex", "pnml")
    net.pl("idle1", 1).pl("wait1").pl("cs1").pl("idle2", 1).pl("wait2").pl("cs2").pl("lock", 1)
    for i in (1, 2):
        net.tr(f"req{i}", [(f"idle{i}", 1)], [(f"wait{i}", 1)])
        net.tr(f"enter{i}", [(f"wait{i}", 1), ("lock", 1)], [(f"cs{i}", 1)])
        net.tr(f"exit{i}", [(f"cs{i}", 1)], [(f"idle{i}", 1), ("lock", 1)])
    return net

def ring(n):
    net = Net(f"ring{n}")
    for i in range(n):
        net.pl(f"r{i}", 1 if i == 0 else 0)
    for i in range(n):
        net.tr(f"move{i}", [(f"r{i}", 1)], [(f"r{(i + 1) % n}", 1)])
    return net

def readers_writers():
    net = Net("rw", "pnml")
    net.pl("ridle", 2).pl("reading").pl("widle", 1).pl("writing").pl("slots", 2)
    net.tr("rstart", [("ridle", 1), ("slots", 1)], [("reading", 1)])
    net.tr("rend", [("reading", 1)], [("ridle", 1), ("slots", 1)])
    net.tr("wstart", [("widle", 1), ("slots", 2)], [("writing", 1)])
    net.tr("wend", [("writing", 1)], [("widle", 1), ("slots", 2)])
    return net

def weighted():
    net = Net("weighted")
    net.pl("x", 4).pl("y").pl("z")
    net.tr("split", [("x", 2)], [("y", 3)])
    net.tr("merge", [("y", 3)], [("x", 1), ("z", 1)])
    net.tr("back", [("z", 1)], [("x", 1)])
    return net

def kanban():
    net = Net("kanban")
    net.pl("cards", 2).pl("queue").pl("work").pl("done")
    net.tr("pull", [("cards", 1)], [("queue", 1)])
    net.tr("start", [("queue", 1)], [("work", 1)])
    net.tr("finish", [("work", 1)], [("done", 1)])
    net.tr("recycle", [("done", 1)], [("cards", 1)])
    return net

def dead_transitions():
    net = Net("deadtr")
    net.pl("s", 1).pl("u").pl("never")
    net.tr("go", [("s", 1)], [("u", 1)])
    net.tr("stuck", [("never", 1), ("s", 1)], [("u", 2)])
    net.tr("back", [("u", 1)], [("s", 1)])
    return net

def fork_join():
    net = Net("forkjoin")
    net.pl("start", 1).pl("l1").pl("l2").pl("r1").pl("r2").pl("end")
    net.tr("fork", [("start", 1)], [("l1", 1), ("r1", 1)])
    net.tr("lstep", [("l1", 1)], [("l2", 1)])
    net.tr("rstep", [("r1", 1)], [("r2", 1)])
    net.tr("join", [("l2", 1), ("r2", 1)], [("end", 1)])
    return net

def shared_resource(n):
    net = Net(f"shared{n}")
    net.pl("res", 1)
    for i in range(n):
        net.pl(f"idle{i}", 1).pl(f"use{i}")
        net.tr(f"acq{i}", [(f"idle{i}", 1), ("res", 1)], [(f"use{i}", 1)])
        net.tr(f"rel{i}", [(f"use{i}", 1)], [(f"idle{i}", 1), ("res", 1)])
    return net

def counter_bounded():
    net = Net("counter")
    net.pl("c").pl("room", 3)
    net.tr("inc", [("room", 1)], [("c", 1)])
    net.tr("dec", [("c", 1)], [("room", 1)])
    return net

def isolated():
    return Net("isolated").pl("p", 7).pl("q", 1).pl("r").tr("t", [("q", 1)], [("r", 1)])

def duplicates():
    net = Net("duplicates")
    net.pl("a", 1).pl("b", 3).pl("c", 1).pl("d")
    net.tr("t1", [("a", 1), ("b", 1), ("c", 1)], [("d", 1)])
    net.tr("t2", [("d", 1)], [("a", 1), ("b", 1), ("c", 1)])
    return net

def source_sink():
    net = Net("sourcesink")
    net.pl("p").pl("q").pl("gate", 1)
    net.tr("gen", [], [("p", 1)])
    net.tr("move", [("p", 1), ("gate", 1)], [("q", 1), ("gate", 1)])
    net.tr("close", [("gate", 1)], [])
    return net

def doubling():
    net = Net("doubling")
    net.pl("a", 1).pl("b")
    net.tr("dbl", [("a", 1)], [("b", 2)])
    net.tr("half", [("b", 2)], [("a", 1)])
    net.tr("grow", [("b", 1)], [("a", 1), ("b", 1)])
    return net

def two_phase():
    net = Net("twophase", "pnml")
    net.pl("ready", 2).pl("voted").pl("commit").pl("abort").pl("coord", 1)
    net.tr("vote", [("ready", 1)], [("voted", 1)])
    net.tr("decide", [("voted", 2), ("coord", 1)], [("commit", 2)])
    net.tr("giveup", [("voted", 1), ("coord", 1)], [("abort", 1)])
    return net


def corpus():
    a, b, c, d = net_a(), net_b(), net_c(), net_d()
    yield a, [EF(ge(tokens("q"), 1)), AG(eq(isum(tokens("p"), tokens("q")), 1)), AG(le(tokens("q"), 1)),
              EF(ge(isum(tokens("p"), tokens("q")), 2)), EF(dead()), AG(fire("t")), AG(neg(ge(tokens("q"), 2)))]
    yield b, [EF(ge(tokens("p"), 3)), AG(le(tokens("p"), 5)), EF(ge(tokens("p"), 4)), EF(ge(tokens("p"), 6)),
              EF(eq(tokens("p"), 7)), AG(le(tokens("p"), 2)), EF(ge(tokens("p"), 2))]
    yield c, [EF(ge(tokens("b"), 1)), AG(eq(isum(tokens("a"), tokens("b")), 1)), EF(ge(tokens("a"), 2)),
              EF(dead()), AG(fire("t1", "t2")), EF(conj(ge(tokens("a"), 1), ge(tokens("b"), 1)))]
    yield d, [AG(ge(tokens("a"), 1)), EF(eq(tokens("a"), 0)), AG(neg(ge(isum(tokens("a"), tokens("b")), 3))),
              EF(fire("t1")), EF(dead())]
    for n in (3, 4, 5):
        net = philosophers(n, "pnml" if n != 3 else "net")
        yield net, [EF(dead()), AG(le(isum(tokens("eat0"), tokens("eat1")), 1)),
                    EF(conj(ge(tokens("eat0"), 1), ge(tokens("eat2"), 1))) if n >= 4 else EF(ge(tokens("eat1"), 1)),
                    AG(le(tokens("fork0"), 1)), EF(fire("release0")),
                    AG(eq(isum(tokens("think0"), tokens("left0"), tokens("eat0")), 1)),
                    EF(ge(isum(*[tokens(f"left{i}") for i in range(n)]), n))]
    pc = producer_consumer(3)
    yield pc, [AG(le(tokens("buffer"), 3)), EF(ge(tokens("buffer"), 3)), EF(ge(tokens("buffer"), 4)),
               AG(eq(isum(tokens("buffer"), tokens("free"), tokens("cbusy")), 3)), EF(dead()),
               EF(conj(eq(tokens("free"), 0), ge(tokens("pready"), 1)))]
    pci = producer_consumer_unbounded()
    yield pci, [EF(ge(tokens("buffer"), 5)), AG(le(isum(tokens("cidle"), tokens("cbusy")), 1)),
                EF(ge(tokens("cbusy"), 2)), EF(conj(ge(tokens("buffer"), 3), ge(tokens("cidle"), 1))),
                AG(le(tokens("pidle"), 1)), EF(conj(ge(tokens("buffer"), 2), ge(tokens("cbusy"), 1)))]
    m = mutex()
    yield m, [AG(neg(conj(ge(tokens("cs1"), 1), ge(tokens("cs2"), 1)))), EF(ge(tokens("cs2"), 1)),
              AG(le(isum(tokens("cs1"), tokens("cs2"), tokens("lock")), 1)), EF(dead()),
              EF(conj(ge(tokens("wait1"), 1), ge(tokens("wait2"), 1))),
              AG(eq(isum(tokens("cs1"), tokens("cs2"), tokens("lock")), 1))]
    r = ring(4)
    yield r, [EF(ge(tokens("r3"), 1)), AG(eq(isum(*[tokens(f"r{i}") for i in range(4)]), 1)),
              EF(ge(isum(tokens("r0"), tokens("r2")), 2)), EF(dead()), AG(fire("move0", "move1", "move2", "move3"))]
    rw = readers_writers()
    yield rw, [AG(neg(conj(ge(tokens("reading"), 1), ge(tokens("writing"), 1)))), EF(ge(tokens("reading"), 2)),
               EF(ge(tokens("writing"), 1)), AG(le(tokens("reading"), 2)), EF(dead()),
               EF(conj(ge(tokens("writing"), 1), ge(tokens("ridle"), 2)))]
    w = weighted()
    yield w, [EF(ge(tokens("z"), 2)), AG(le(tokens("y"), 6)), EF(ge(tokens("y"), 7)), EF(dead()),
              AG(ge(isum(prod(2, tokens("x")), tokens("y"), prod(2, tokens("z"))), 1)),
              EF(eq(tokens("x"), 0))]
    k = kanban()
    yield k, [AG(eq(isum(tokens("cards"), tokens("queue"), tokens("work"), tokens("done")), 2)),
              EF(ge(tokens("done"), 2)), EF(ge(tokens("work"), 3)), EF(dead()), AG(fire("pull", "start", "finish", "recycle"))]
    dt = dead_transitions()
    yield dt, [AG(neg(fire("stuck"))), EF(fire("stuck")), EF(ge(tokens("u"), 1)), AG(eq(tokens("never"), 0)),
               EF(ge(tokens("u"), 2)), EF(dead())]
    fj = fork_join()
    yield fj, [EF(ge(tokens("end"), 1)), AG(le(isum(tokens("l1"), tokens("l2")), 1)), EF(dead()),
               EF(conj(ge(tokens("l2"), 1), ge(tokens("r1"), 1))), AG(imply(ge(tokens("end"), 1), eq(tokens("start"), 0))),
               EF(ge(tokens("end"), 2))]
    sr = shared_resource(3)
    yield sr, [AG(le(isum(tokens("use0"), tokens("use1"), tokens("use2")), 1)), EF(ge(tokens("use2"), 1)),
               EF(ge(isum(tokens("use0"), tokens("use1")), 2)), EF(dead()), AG(le(tokens("res"), 1))]
    cb = counter_bounded()
    yield cb, [EF(ge(tokens("c"), 3)), EF(ge(tokens("c"), 4)), AG(eq(isum(tokens("c"), tokens("room")), 3)),
               EF(dead()), AG(lt(tokens("c"), 4)), EF(ne(tokens("c"), 0))]
    iso = isolated()
    yield iso, [AG(eq(tokens("p"), 7)), EF(ge(tokens("r"), 1)), EF(ge(tokens("p"), 8)), EF(dead()),
                AG(eq(isum(tokens("q"), tokens("r")), 1))]
    dup = duplicates()
    yield dup, [AG(eq(diff(tokens("b"), tokens("a")), 2)), EF(ge(tokens("d"), 1)), EF(ge(tokens("d"), 2)),
                EF(dead()), AG(ge(tokens("b"), 2))]
    ss = source_sink()
    yield ss, [EF(ge(tokens("q"), 3)), EF(dead()), AG(le(tokens("gate"), 1)),
               EF(conj(eq(tokens("gate"), 0), ge(tokens("q"), 1))), EF(ge(tokens("gate"), 2))]
    db = doubling()
    yield db, [EF(ge(tokens("b"), 5)), EF(ge(tokens("a"), 3)), EF(conj(ge(tokens("a"), 2), ge(tokens("b"), 3))),
               AG(le(tokens("a"), 4)), EF(eq(tokens("a"), 2))]
    tp = two_phase()
    yield tp, [AG(neg(conj(ge(tokens("commit"), 1), ge(tokens("abort"), 1)))), EF(ge(tokens("commit"), 2)),
               EF(ge(tokens("abort"), 1)), EF(dead()), AG(le(tokens("commit"), 2)),
               EF(conj(ge(tokens("abort"), 1), ge(tokens("voted"), 1)))]


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "corpus")
    os.makedirs(os.path.join(root, "nets"), exist_ok=True)
    os.makedirs(os.path.join(root, "properties"), exist_ok=True)
    count = 0
    for net, queries in corpus():
        ext = ".pnml" if net.fmt == "pnml" else ".net"
        with open(os.path.join(root, "nets", net.name + ext), "w") as f:
            f.write(net.pnml() if net.fmt == "pnml" else net.text())
        with open(os.path.join(root, "properties", net.name + ".xml"), "w") as f:
            f.write(properties_xml(net.name, queries))
        count += len(queries)
    # A PNML copy of NET-A for the parser equivalence test.
    os.makedirs(os.path.join(root, "copies"), exist_ok=True)
    with open(os.path.join(root, "copies", "NET-A.pnml"), "w") as f:
        f.write(net_a().pnml())
    print(f"wrote {count} properties")


if __name__ == "__main__":
    main()
