"""Registry of plane maps, addressable by strings such as ``"translation(0.5,0)"``."""

from __future__ import annotations

import re

import numpy as np

from .calculus import GrushinMap


def identity():
    return lambda z: np.asarray(z, dtype=complex)


def translation(a=0.0, b=0.0):
    c = complex(a, b)
    return lambda z: np.asarray(z, dtype=complex) + c


def dilation(c=2.0):
    if c == 0:
        raise ValueError("dilation factor must be non-zero")
    return lambda z: np.asarray(z, dtype=complex) * c


def moebius(a=1.0, b=0.0, c=0.0, d=1.0):
    if a * d - b * c == 0:
        raise ValueError("moebius map needs ad - bc != 0")
    return lambda z: (a * np.asarray(z, dtype=complex) + b) / (c * np.asarray(z, dtype=complex) + d)


def antiholomorphic_mix(kappa=0.3):
    """f(z) = z + kappa conj(z); its Beltrami coefficient is the constant kappa."""
    return lambda z: np.asarray(z, dtype=complex) + kappa * np.conj(z)


def payne_closed_form(k=3, s=0.1):
    from .flows import payne_plane_map

    return payne_plane_map(int(k), float(s))


def payne_variant_f3star(s=0.1):
    """(is + z)/(1 + isz): the k = 3 map renormalized so it tends to 1/z instead of 0."""
    return lambda z: (1j * s + np.asarray(z, dtype=complex)) / (1.0 + 1j * s * np.asarray(z, dtype=complex))


REGISTRY = {
    "identity": identity,
    "translation": translation,
    "dilation": dilation,
    "moebius": moebius,
    "antiholomorphic_mix": antiholomorphic_mix,
    "payne_closed_form": payne_closed_form,
    "payne_variant_f3star": payne_variant_f3star,
}

_CALL = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\((.*)\))?\s*$")


def parse_map(spec):
    """Split ``"name(x,y,...)"`` into (name, [floats])."""
    m = _CALL.match(spec)
    if not m or m.group(1) not in REGISTRY:
        raise ValueError(f"unknown map {spec!r}; known: {', '.join(REGISTRY)}")
    args = m.group(2)
    vals = [float(a) for a in args.split(",")] if args and args.strip() else []
    return m.group(1), vals


def plane_map(spec):
    name, vals = parse_map(spec)
    return REGISTRY[name](*vals)


def conjugated(profile, spec, *args):
    """g = Phi^-1 o f o Phi for a registry map, from a spec string or a name plus arguments."""
    if args:
        name, vals = spec, list(args)
        if name not in REGISTRY:
            raise ValueError(f"unknown map {name!r}")
    else:
        name, vals = parse_map(spec)
    f = REGISTRY[name](*vals)
    label = f"{name}({','.join(repr(v) for v in vals)})"
    return GrushinMap.conjugate(profile, f, label=label, name=name, args=tuple(vals))
