"""Reading and writing multilabel datasets in MULAN/MEKA ARFF conventions.

MULAN distributions pair an ARFF file with an XML document listing the label
attribute names. MEKA encodes the label count in the relation name instead
(``@relation 'name: -C n'``): a positive ``n`` marks the first ``n``
attributes as labels, a negative one the last ``|n|``. Both dense and sparse
ARFF bodies are accepted; missing values are rejected outright because the
distance metric downstream has no imputation story.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .dataset import (
    NOMINAL,
    NUMERIC,
    FeatureSpec,
    MultiLabelDataset,
    build_dataset,
)
from .exceptions import DataFormatError

_MEKA_PATTERN = re.compile(r"-C\s+(-?\d+)")
_MULAN_XMLNS = "http://mulan.sourceforge.net/labels"


@dataclass(frozen=True)
class DatasetSource:
    """Location of an ARFF file plus the label identification rule.

    Exactly one of ``xml_path`` (MULAN) or ``label_count`` (MEKA ``-C n``)
    should be given; when both are absent the ``-C`` clause is parsed from
    the relation name inside the ARFF file.
    """

    arff_path: Path
    xml_path: Path | None = None
    label_count: int | None = None

    def __post_init__(self) -> None:
        if self.xml_path is not None and self.label_count is not None:
            raise DataFormatError(
                "give either an XML label file or a label count, not both"
            )


def _unquote(token: str) -> str:
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        body = token[1:-1]
        return re.sub(r"\\(.)", r"\1", body)
    return token


def _split_values(line: str) -> list[str]:
    """Split a comma-separated ARFF payload, honoring quotes and escapes."""
    out: list[str] = []
    buf: list[str] = []
    quote: str | None = None
    i = 0
    while i < len(line):
        ch = line[i]
        if quote:
            if ch == "\\" and i + 1 < len(line):
                buf.append(ch)
                buf.append(line[i + 1])
                i += 2
                continue
            if ch == quote:
                quote = None
            buf.append(ch)
        elif ch in "'\"":
            quote = ch
            buf.append(ch)
        elif ch == ",":
            out.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    out.append("".join(buf))
    return out


@dataclass
class _Attribute:
    name: str
    kind: str  # "numeric" or "nominal"
    domain: tuple[str, ...] = ()


def _parse_attribute(line: str, lineno: int) -> _Attribute:
    body = line[len("@attribute"):].strip()
    if body.startswith(("'", '"')):
        quote = body[0]
        end = 1
        while end < len(body):
            if body[end] == "\\":
                end += 2
                continue
            if body[end] == quote:
                break
            end += 1
        if end >= len(body):
            raise DataFormatError(f"line {lineno}: unterminated attribute name")
        name = _unquote(body[: end + 1])
        rest = body[end + 1:].strip()
    else:
        parts = body.split(None, 1)
        if len(parts) != 2:
            raise DataFormatError(f"line {lineno}: malformed @attribute")
        name, rest = parts[0], parts[1].strip()
    if rest.startswith("{"):
        if not rest.endswith("}"):
            raise DataFormatError(f"line {lineno}: unterminated nominal domain")
        values = tuple(_unquote(v) for v in _split_values(rest[1:-1]))
        if not values or any(v == "" for v in values):
            raise DataFormatError(f"line {lineno}: empty nominal domain value")
        return _Attribute(name, NOMINAL, values)
    kind = rest.split()[0].lower()
    if kind in ("numeric", "real", "integer"):
        return _Attribute(name, NUMERIC)
    raise DataFormatError(
        f"line {lineno}: unsupported attribute type {rest!r} for {name!r}"
    )


def read_label_names(xml_path: Path | str) -> tuple[str, ...]:
    """Label names from a MULAN labels XML document, in document order."""
    try:
        root = ET.parse(xml_path).getroot()
    except ET.ParseError as exc:
        raise DataFormatError(f"cannot parse label XML {xml_path}: {exc}") from exc
    names = []
    for el in root.iter():
        tag = el.tag.rsplit("}", 1)[-1]
        if tag == "label":
            name = el.get("name")
            if not name:
                raise DataFormatError(f"{xml_path}: label element without a name")
            names.append(name)
    if not names:
        raise DataFormatError(f"{xml_path}: no label elements found")
    return tuple(names)


def _parse_header(lines: list[tuple[int, str]]) -> tuple[str, list[_Attribute], int]:
    relation = None
    attributes: list[_Attribute] = []
    for pos, (lineno, line) in enumerate(lines):
        low = line.lower()
        if low.startswith("@relation"):
            relation = _unquote(line[len("@relation"):].strip())
        elif low.startswith("@attribute"):
            attributes.append(_parse_attribute(line, lineno))
        elif low.startswith("@data"):
            if relation is None:
                raise DataFormatError("missing @relation before @data")
            if not attributes:
                raise DataFormatError("missing @attribute declarations")
            return relation, attributes, pos + 1
        else:
            raise DataFormatError(f"line {lineno}: unexpected header line")
    raise DataFormatError("missing @data section")


def _cell(token: str, attr: _Attribute, row: int) -> float | str:
    value = _unquote(token)
    if value == "?":
        raise DataFormatError(
            f"missing value at row {row}, attribute {attr.name!r}"
        )
    if attr.kind == NUMERIC:
        try:
            return float(value)
        except ValueError:
            raise DataFormatError(
                f"row {row}: non-numeric value {value!r} for attribute "
                f"{attr.name!r}"
            ) from None
    if value not in attr.domain:
        raise DataFormatError(
            f"row {row}: value {value!r} outside domain of attribute "
            f"{attr.name!r}"
        )
    return value


def _parse_rows(
    lines: list[tuple[int, str]], attributes: list[_Attribute]
) -> list[list[float | str]]:
    rows: list[list[float | str]] = []
    for row_no, (lineno, line) in enumerate(lines):
        if line.startswith("{"):
            if not line.endswith("}"):
                raise DataFormatError(f"line {lineno}: unterminated sparse row")
            # sparse rows default every unmentioned attribute to 0 /
            # the first nominal symbol
            values: list[float | str] = [
                0.0 if a.kind == NUMERIC else a.domain[0] for a in attributes
            ]
            body = line[1:-1].strip()
            if body:
                for item in _split_values(body):
                    item = item.strip()
                    if not item:
                        continue
                    parts = item.split(None, 1)
                    if len(parts) != 2:
                        raise DataFormatError(
                            f"line {lineno}: malformed sparse entry {item!r}"
                        )
                    try:
                        col = int(parts[0])
                    except ValueError:
                        raise DataFormatError(
                            f"line {lineno}: bad sparse index {parts[0]!r}"
                        ) from None
                    if not 0 <= col < len(attributes):
                        raise DataFormatError(
                            f"line {lineno}: sparse index {col} out of range"
                        )
                    values[col] = _cell(parts[1], attributes[col], row_no)
            rows.append(values)
        else:
            tokens = _split_values(line)
            if len(tokens) != len(attributes):
                raise DataFormatError(
                    f"row {row_no}: expected {len(attributes)} values, "
                    f"got {len(tokens)}"
                )
            rows.append(
                [_cell(t, a, row_no) for t, a in zip(tokens, attributes)]
            )
    return rows


def _label_flag(value: float | str, attr: _Attribute, row: int) -> int:
    if isinstance(value, str):
        if value not in ("0", "1"):
            raise DataFormatError(
                f"row {row}: label attribute {attr.name!r} holds non-binary "
                f"value {value!r}"
            )
        return int(value)
    if value not in (0.0, 1.0):
        raise DataFormatError(
            f"row {row}: label attribute {attr.name!r} holds non-binary "
            f"value {value!r}"
        )
    return int(value)


def read_dataset(
    source: DatasetSource | str | Path,
    *,
    xml_path: str | Path | None = None,
    label_count: int | None = None,
) -> MultiLabelDataset:
    """Load a multilabel dataset from an ARFF file.

    Parameters
    ----------
    source : DatasetSource or path
        When a bare path is given, the label rule comes from ``xml_path`` /
        ``label_count``, or failing those from a ``-C n`` clause embedded in
        the relation name.

    Raises
    ------
    DataFormatError
        On malformed ARFF/XML content, missing values, non-binary label
        attributes, or XML labels absent from the ARFF header.
    """
    if not isinstance(source, DatasetSource):
        source = DatasetSource(
            Path(source),
            Path(xml_path) if xml_path is not None else None,
            label_count,
        )
    try:
        text = Path(source.arff_path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {source.arff_path}: {exc}") from exc

    lines = [
        (i + 1, stripped)
        for i, raw in enumerate(text.splitlines())
        if (stripped := raw.strip()) and not stripped.startswith("%")
    ]
    relation, attributes, data_start = _parse_header(lines)
    rows = _parse_rows(lines[data_start:], attributes)

    names = [a.name for a in attributes]
    if source.xml_path is not None:
        label_names = read_label_names(source.xml_path)
        missing = [n for n in label_names if n not in names]
        if missing:
            raise DataFormatError(
                f"labels {missing} from {source.xml_path} not in ARFF header"
            )
        label_cols = [names.index(n) for n in label_names]
        dataset_name = relation
    else:
        count = source.label_count
        if count is None:
            match = _MEKA_PATTERN.search(relation)
            if not match:
                raise DataFormatError(
                    "no label rule: give an XML file, a label count, or a "
                    "-C clause in the relation name"
                )
            count = int(match.group(1))
        if count == 0 or abs(count) >= len(attributes):
            raise DataFormatError(f"label count {count} out of range")
        if count > 0:
            label_cols = list(range(count))
        else:
            label_cols = list(range(len(attributes) + count, len(attributes)))
        label_names = tuple(names[c] for c in label_cols)
        dataset_name = _MEKA_PATTERN.sub("", relation).rstrip(" :").strip()

    label_set = set(label_cols)
    feature_cols = [j for j in range(len(attributes)) if j not in label_set]
    specs = [
        FeatureSpec(attributes[j].name, attributes[j].kind, attributes[j].domain)
        if attributes[j].kind == NOMINAL
        else FeatureSpec(attributes[j].name, NUMERIC)
        for j in feature_cols
    ]

    built_rows = []
    for row_no, row in enumerate(rows):
        feats = [row[j] for j in feature_cols]
        labels = [
            _label_flag(row[c], attributes[c], row_no) for c in label_cols
        ]
        built_rows.append((feats, labels))
    return build_dataset(specs, label_names, built_rows, name=dataset_name)


def _quote(name: str) -> str:
    if re.search(r"[\s,'\"{}%]", name) or name == "":
        escaped = name.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return name


def _render_numeric(value: float) -> str:
    # repr() keeps the shortest digit string that round-trips exactly
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_dataset(
    dataset: MultiLabelDataset, directory: str | Path, base_name: str
) -> Path:
    """Write ``<base_name>.arff`` plus a MULAN labels XML file.

    Returns the ARFF path. Feature columns come first, label columns last as
    nominal ``{0,1}`` attributes; numeric values are rendered at full
    precision so that reading the files back reproduces the dataset exactly.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arff_path = directory / f"{base_name}.arff"
    xml_file = directory / f"{base_name}.xml"

    out = [f"@relation {_quote(dataset.name)}", ""]
    for spec in dataset.feature_specs:
        if spec.kind == NUMERIC:
            out.append(f"@attribute {_quote(spec.name)} numeric")
        else:
            domain = ",".join(_quote(v) for v in spec.domain)
            out.append(f"@attribute {_quote(spec.name)} {{{domain}}}")
    for label in dataset.label_names:
        out.append(f"@attribute {_quote(label)} {{0,1}}")
    out.append("")
    out.append("@data")
    for i in range(dataset.n_instances):
        cells = []
        for j, spec in enumerate(dataset.feature_specs):
            if spec.kind == NUMERIC:
                cells.append(_render_numeric(float(dataset.X[i, j])))
            else:
                cells.append(_quote(spec.domain[int(dataset.X[i, j])]))
        cells.extend(str(int(v)) for v in dataset.Y[i])
        out.append(",".join(cells))
    arff_path.write_text("\n".join(out) + "\n")

    root = ET.Element("labels", xmlns=_MULAN_XMLNS)
    for label in dataset.label_names:
        ET.SubElement(root, "label", name=label)
    ET.indent(tree := ET.ElementTree(root))
    tree.write(xml_file, encoding="utf-8", xml_declaration=True)
    return arff_path


_PARAM_ORDER = (("percentage", "P"), ("k", "k"), ("threshold", "threshold"))


def _render_param(value: object) -> str:
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def output_name(base_name: str, algorithm: str, params: dict) -> str:
    """File name for a resampled dataset: base, algorithm, then parameters.

    Parameters appear in the fixed order percentage, k, threshold and are
    rendered minimally (``25`` rather than ``25.0``), which makes names
    unique per (algorithm, parameters) combination.
    """
    parts = [base_name, algorithm]
    for key, rendered in _PARAM_ORDER:
        if key in params and params[key] is not None:
            parts.append(f"{rendered}={_render_param(params[key])}")
    return "_".join(parts) + ".arff"
