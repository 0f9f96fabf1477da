"""Build an argparse parser from a dataclass so every field is a flag."""

import argparse
import dataclasses


def _tuple_of(kind):
    return lambda text: tuple(kind(v) for v in text.split(","))


def parse_config(cls, argv=None, description: str | None = None):
    p = argparse.ArgumentParser(description=description or cls.__doc__)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif isinstance(default, tuple):
            p.add_argument(flag, type=_tuple_of(type(default[0])), default=default, help=f"default {default}")
        else:
            kind = str if default is None else type(default)
            p.add_argument(flag, type=kind, default=default, help=f"default {default}")
    return cls(**vars(p.parse_args(argv)))
