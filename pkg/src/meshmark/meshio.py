"""ASCII OFF and (minimal) OBJ readers and writers.

Both writers emit coordinates with repr(), i.e. the shortest decimal string
that round-trips the exact double, so write/parse cycles are bit-exact and
deterministic.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh, MeshParseError


def _lines(text: str):
    """Yield (line_number, stripped_content) skipping blanks and # comments."""
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


def _floats(tokens, count, lineno):
    if len(tokens) != count:
        raise MeshParseError(f"expected {count} numbers, got {len(tokens)}", lineno)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise MeshParseError(f"bad number in {tokens!r}", lineno) from None
    if not all(np.isfinite(vals)):
        raise MeshParseError("non-finite coordinate", lineno)
    return vals


def parse_off(data: str | bytes) -> Mesh:
    """Parse an ASCII OFF stream (triangular faces only)."""
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")
    it = _lines(data)

    try:
        lineno, header = next(it)
    except StopIteration:
        raise MeshParseError("empty OFF stream", 1) from None
    if header != "OFF":
        raise MeshParseError(f"expected OFF header, got {header!r}", lineno)

    try:
        lineno, counts = next(it)
    except StopIteration:
        raise MeshParseError("missing counts line", lineno) from None
    tok = counts.split()
    if len(tok) != 3:
        raise MeshParseError("counts line must be 'nv nf ne'", lineno)
    try:
        nv, nf, _ = (int(t) for t in tok)
    except ValueError:
        raise MeshParseError("counts must be integers", lineno) from None

    vertices = np.empty((nv, 3))
    for k in range(nv):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise MeshParseError(f"expected {nv} vertex lines, got {k}", lineno) from None
        vertices[k] = _floats(line.split(), 3, lineno)

    faces = np.empty((nf, 3), dtype=np.int64)
    for k in range(nf):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise MeshParseError(f"expected {nf} face lines, got {k}", lineno) from None
        tok = line.split()
        if not tok or tok[0] != "3":
            raise MeshParseError(f"non-triangle face (arity {tok[0] if tok else '?'})", lineno)
        if len(tok) != 4:
            raise MeshParseError("face line must be '3 i j k'", lineno)
        try:
            idx = [int(t) for t in tok[1:]]
        except ValueError:
            raise MeshParseError("face indices must be integers", lineno) from None
        if any(i < 0 or i >= nv for i in idx):
            raise MeshParseError(f"face index out of range: {idx}", lineno)
        if len(set(idx)) != 3:
            raise MeshParseError(f"face with repeated vertex index: {idx}", lineno)
        faces[k] = idx

    return Mesh(vertices, faces)


def write_off(mesh: Mesh) -> str:
    """Serialize a mesh as ASCII OFF; coordinates round-trip exactly."""
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    for x, y, z in mesh.vertices.tolist():
        out.append(f"{x!r} {y!r} {z!r}")
    for a, b, c in mesh.faces:
        out.append(f"3 {a} {b} {c}")
    return "\n".join(out) + "\n"


def parse_obj(data: str | bytes) -> Mesh:
    """Parse the v/f subset of Wavefront OBJ; other record types are ignored.

    Face entries may use the i, i/t or i/t/n forms; only the (1-based) vertex
    index is taken. Faces must be triangles.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")

    vertices: list = []
    faces: list = []
    for lineno, line in _lines(data):
        tok = line.split()
        if tok[0] == "v":
            vertices.append(_floats(tok[1:], 3, lineno))
        elif tok[0] == "f":
            if len(tok) != 4:
                raise MeshParseError(f"non-triangle face with {len(tok) - 1} corners", lineno)
            idx = []
            for t in tok[1:]:
                head = t.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise MeshParseError(f"bad face index {t!r}", lineno) from None
                if i < 1:
                    raise MeshParseError(f"OBJ indices are 1-based and positive, got {i}", lineno)
                idx.append(i - 1)
            if any(i >= len(vertices) for i in idx):
                raise MeshParseError(f"face index out of range: {[i + 1 for i in idx]}", lineno)
            if len(set(idx)) != 3:
                raise MeshParseError("face with repeated vertex index", lineno)
            faces.append(idx)
        # everything else (vn, vt, o, g, s, usemtl, ...) is ignored

    if not vertices:
        raise MeshParseError("no vertices in OBJ stream", 1)
    if not faces:
        raise MeshParseError("no faces in OBJ stream", 1)
    return Mesh(np.array(vertices), np.array(faces, dtype=np.int64))


def write_obj(mesh: Mesh) -> str:
    """Serialize a mesh as minimal OBJ (v and f records)."""
    out = []
    for x, y, z in mesh.vertices.tolist():
        out.append(f"v {x!r} {y!r} {z!r}")
    for a, b, c in mesh.faces:
        out.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(out) + "\n"


def load_mesh(path: str) -> Mesh:
    """Load a mesh file, picking the parser from the extension (.off/.obj)."""
    lower = str(path).lower()
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        data = fh.read()
    if lower.endswith(".obj"):
        return parse_obj(data)
    return parse_off(data)


def save_mesh(mesh: Mesh, path: str) -> None:
    """Write a mesh file, picking the writer from the extension (.off/.obj)."""
    text = write_obj(mesh) if str(path).lower().endswith(".obj") else write_off(mesh)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)
