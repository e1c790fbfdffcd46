"""ARFF (dense subset) and headered CSV readers and writers.

The last ARFF attribute is the class. Data rows are parsed lazily, so a
file is never held in memory as a whole.
"""

from __future__ import annotations

import csv
import io
import math
import os
import re
from typing import Iterable, Iterator, Optional, TextIO

from .stream import AttributeSpec, Instance, InstanceSource, Schema, SchemaViolation

NUMERIC_TYPES = {"numeric", "real", "integer"}
MISSING_TOKENS = {"?", ""}
_NEEDS_QUOTES = re.compile(r"[\s,'\"{}%\\]|^\?$|^$")


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownColumn(KeyError):
    pass


def _lines(source: str | TextIO | Iterable[str]) -> Iterator[str]:
    if isinstance(source, str):
        return iter(source.splitlines())
    return (line.rstrip("\r\n") for line in source)


def _scan_quoted(text: str, i: int, line_no: int) -> tuple[str, int]:
    """Read a quoted token starting at text[i]; returns (token, index after it)."""
    q = text[i]
    i += 1
    n = len(text)
    buf = []
    while True:
        if i >= n:
            raise ParseError(line_no, "unterminated quoted value")
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            buf.append(text[i + 1])
            i += 2
        elif ch == q:
            return "".join(buf), i + 1
        else:
            buf.append(ch)
            i += 1


def split_row(text: str, line_no: int) -> list[Optional[str]]:
    """Split a comma-separated ARFF row honoring ' and " quotes.

    Unquoted ``?`` cells come back as None; quoted cells are never missing.
    """
    cells: list[Optional[str]] = []
    i, n = 0, len(text)
    while True:
        while i < n and text[i] in " \t":
            i += 1
        if i < n and text[i] in "'\"":
            cell, i = _scan_quoted(text, i, line_no)
            cells.append(cell)
            while i < n and text[i] in " \t":
                i += 1
            if i < n and text[i] != ",":
                raise ParseError(line_no, "unexpected text after quoted value")
        else:
            j = text.find(",", i)
            end = n if j < 0 else j
            cell = text[i:end].strip()
            cells.append(None if cell == "?" else cell)
            i = end
        if i >= n:
            return cells
        i += 1  # skip comma


def quote(token: str) -> str:
    if _NEEDS_QUOTES.search(token):
        return "'" + token.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return token


def _parse_attribute(rest: str, line_no: int) -> AttributeSpec:
    rest = rest.strip()
    if not rest:
        raise ParseError(line_no, "attribute declaration without a name")
    if rest[0] in "'\"":
        name, end = _scan_quoted(rest, 0, line_no)
        type_part = rest[end:].strip()
    else:
        parts = rest.split(None, 1)
        if len(parts) < 2:
            raise ParseError(line_no, "attribute declaration without a type")
        name, type_part = parts[0], parts[1].strip()
    if type_part.startswith("{"):
        if not type_part.endswith("}"):
            raise ParseError(line_no, "unterminated nominal value list")
        inner = type_part[1:-1]
        values = [v for v in split_row(inner, line_no)] if inner.strip() else []
        if any(v is None or v == "" for v in values):
            raise ParseError(line_no, "empty nominal value")
        try:
            return AttributeSpec.nominal(name, values)
        except SchemaViolation as exc:
            raise ParseError(line_no, str(exc)) from None
    kind = type_part.split()[0].lower() if type_part else ""
    if kind in NUMERIC_TYPES:
        return AttributeSpec.numeric(name)
    raise ParseError(line_no, f"unsupported attribute type {type_part!r}")


def _convert(schema: Schema, cells: list[Optional[str]], line_no: int) -> Instance:
    n_attr = schema.n_attributes
    if len(cells) != n_attr + 1:
        raise ParseError(line_no, f"expected {n_attr + 1} values, found {len(cells)}")
    values: list = []
    for spec, cell in zip(schema.attributes, cells):
        if cell is None:
            values.append(None)
        elif spec.is_nominal:
            try:
                values.append(spec.values.index(cell))
            except ValueError:
                raise ParseError(line_no, f"unknown nominal value {cell!r} for {spec.name!r}") from None
        else:
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(line_no, f"non-numeric value {cell!r} for {spec.name!r}") from None
    label = cells[-1]
    if label is None:
        raise ParseError(line_no, "missing class value")
    try:
        y = schema.class_values.index(label)
    except ValueError:
        raise ParseError(line_no, f"unknown nominal value {label!r} for the class") from None
    return schema.instance(values, y)


def parse_arff(source: str | TextIO | Iterable[str]) -> tuple[Schema, InstanceSource]:
    """Parse the header eagerly and return a lazy stream over the data rows."""
    lines = _lines(source)
    attrs: list[AttributeSpec] = []
    line_no = 0
    relation = None
    found_data = False
    for raw in lines:
        line_no += 1
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split(None, 1)
        key = parts[0].lower()
        rest = parts[1] if len(parts) > 1 else ""
        if key == "@relation":
            rest = rest.strip()
            relation = _scan_quoted(rest, 0, line_no)[0] if rest[:1] in ("'", '"') else rest
        elif key == "@attribute":
            attrs.append(_parse_attribute(rest, line_no))
        elif key == "@data":
            found_data = True
            break
        else:
            raise ParseError(line_no, f"unexpected header line {line!r}")
    if not found_data:
        raise ParseError(line_no, "missing @data section")
    if len(attrs) < 1:
        raise ParseError(line_no, "no attributes declared")
    cls = attrs[-1]
    if not cls.is_nominal:
        raise ParseError(line_no, "the last attribute (class) must be nominal")
    try:
        schema = Schema(tuple(attrs[:-1]), cls.values)
    except SchemaViolation as exc:
        raise ParseError(line_no, str(exc)) from None
    start = line_no

    def rows():
        n = start
        for raw in lines:
            n += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            if line.startswith("{"):
                raise ParseError(n, "sparse ARFF rows are not supported")
            yield _convert(schema, split_row(line, n), n)

    source_obj = InstanceSource(schema, rows())
    source_obj.relation = relation
    source_obj.class_name = cls.name
    return schema, source_obj


def serialize_arff(schema: Schema, instances: Iterable[Instance], relation: str = "stream",
                   class_name: str = "class", out: Optional[TextIO] = None) -> Optional[str]:
    """Write ARFF text; returns it as a string when ``out`` is None."""
    buf = io.StringIO() if out is None else out
    buf.write(f"@relation {quote(relation)}\n\n")
    for spec in schema.attributes:
        if spec.is_nominal:
            kind = "{" + ",".join(quote(v) for v in spec.values) + "}"
        else:
            kind = "numeric"
        buf.write(f"@attribute {quote(spec.name)} {kind}\n")
    buf.write(f"@attribute {quote(class_name)} {{{','.join(quote(v) for v in schema.class_values)}}}\n")
    buf.write("\n@data\n")
    for inst in instances:
        cells = [_format_cell(spec, v) for spec, v in zip(schema.attributes, inst.values)]
        cells.append(quote(schema.class_values[inst.true_class]))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue() if out is None else None


def _format_cell(spec: AttributeSpec, v) -> str:
    if v is None:
        return "?"
    if spec.is_nominal:
        return quote(spec.values[v])
    return repr(float(v))


# ---------------------------------------------------------------- CSV


def _is_number(cell: str) -> bool:
    try:
        x = float(cell)
    except ValueError:
        return False
    return not math.isnan(x)


def _infer_schema(header: list[str], rows: Iterable[list[str]], class_column: str) -> tuple[Schema, int]:
    if class_column not in header:
        raise UnknownColumn(class_column)
    if len(set(header)) != len(header):
        raise ParseError(1, "duplicate column names")
    ci = header.index(class_column)
    n = len(header)
    numeric = [True] * n
    seen: list[dict[str, None]] = [dict() for _ in range(n)]
    for line_no, row in enumerate(rows, start=2):
        if len(row) != n:
            raise ParseError(line_no, f"expected {n} values, found {len(row)}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell in MISSING_TOKENS:
                if j == ci:
                    raise ParseError(line_no, "missing class value")
                continue
            seen[j].setdefault(cell)
            if numeric[j] and not _is_number(cell):
                numeric[j] = False
    attrs = []
    for j, name in enumerate(header):
        if j == ci:
            continue
        if numeric[j]:
            attrs.append(AttributeSpec.numeric(name))
        elif len(seen[j]) < 2:
            raise ParseError(1, f"column {name!r} has fewer than two distinct values")
        else:
            attrs.append(AttributeSpec.nominal(name, list(seen[j])))
    return Schema(tuple(attrs), tuple(seen[ci])), ci


def _csv_instances(schema: Schema, ci: int, rows: Iterable[list[str]]) -> Iterator[Instance]:
    for line_no, row in enumerate(rows, start=2):
        cells: list[Optional[str]] = []
        for j, cell in enumerate(row):
            if j == ci:
                continue
            cell = cell.strip()
            cells.append(None if cell in MISSING_TOKENS else cell)
        cells.append(row[ci].strip())
        yield _convert(schema, cells, line_no)


def parse_csv(source: str | TextIO, class_column: str) -> tuple[Schema, InstanceSource]:
    """Headered CSV with inferred column types; buffers the input once."""
    text = source if isinstance(source, str) else source.read()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError(1, "missing header row")
    header = [h.strip() for h in rows[0]]
    schema, ci = _infer_schema(header, rows[1:], class_column)
    return schema, InstanceSource(schema, _csv_instances(schema, ci, rows[1:]), len(rows) - 1)


def load_csv(path: str | os.PathLike, class_column: str) -> tuple[Schema, InstanceSource]:
    """Two passes over a CSV file: one to infer types, one to stream rows."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = [h.strip() for h in next(reader, [])]
        if not header:
            raise ParseError(1, "missing header row")
        schema, ci = _infer_schema(header, (r for r in reader if r), class_column)

    def rows():
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            next(reader, None)
            yield from _csv_instances(schema, ci, (r for r in reader if r))

    return schema, InstanceSource(schema, rows())


def load_arff(path: str | os.PathLike) -> tuple[Schema, InstanceSource]:
    f = open(path, encoding="utf-8")
    schema, src = parse_arff(f)
    inner = src._it

    def closing():
        try:
            yield from inner
        finally:
            f.close()

    src._it = closing()
    return schema, src


def load_dataset(path: str | os.PathLike, class_column: Optional[str] = None) -> tuple[Schema, InstanceSource]:
    """Dispatch on file extension (.arff or .csv)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".arff":
        return load_arff(path)
    if ext == ".csv":
        if class_column is None:
            with open(path, newline="", encoding="utf-8") as f:
                header = next(csv.reader(f), [])
            if not header:
                raise ParseError(1, "missing header row")
            class_column = header[-1].strip()
        return load_csv(path, class_column)
    raise ValueError(f"unsupported file extension {ext!r} (expected .arff or .csv)")


def serialize_csv(schema: Schema, instances: Iterable[Instance], class_name: str = "class",
                  out: Optional[TextIO] = None) -> Optional[str]:
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in schema.attributes] + [class_name])
    for inst in instances:
        row = []
        for spec, v in zip(schema.attributes, inst.values):
            if v is None:
                row.append("?")
            elif spec.is_nominal:
                row.append(spec.values[v])
            else:
                row.append(repr(float(v)))
        row.append(schema.class_values[inst.true_class])
        writer.writerow(row)
    return buf.getvalue() if out is None else None
