"""Plain-text record files.

One ``#`` header line names the columns, then one whitespace separated row
per record: coordinate, probabilities ``P_1 .. P_N`` and the norm deviation.
Probabilities are clamped to ``[0, 1]`` on write.
"""

import numpy as np


class RecordWriter:
    """Streams records to ``path`` one row at a time.

    ``scale`` divides the coordinate before printing (e.g. the solar radius,
    so positions come out as radius fractions).
    """

    def __init__(self, path, n_flavors, label="r/RSun", scale=1.0, plot=False):
        self.path = path
        self.scale = scale
        self.plot = plot
        self.count = 0
        try:
            self._fh = open(path, "w")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror}") from exc
        if plot:
            columns = [label, "P_1"]
        else:
            columns = [label] + [f"P_{i + 1}" for i in range(n_flavors)] + ["norm_deviation"]
        self._fh.write("# " + " ".join(columns) + "\n")

    def write(self, record):
        p = np.clip(record.probabilities, 0.0, 1.0)
        fields = ["%.10g" % (record.coordinate / self.scale)]
        if self.plot:
            fields.append("%.6f" % p[0])
        else:
            fields.extend("%.6f" % v for v in p)
            fields.append("%.3e" % record.norm_deviation)
        self._fh.write(" ".join(fields) + "\n")
        self._fh.flush()
        self.count += 1

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_records(records, path, label="r/RSun", scale=1.0):
    """Write a non-empty sequence of records to ``path``."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    with RecordWriter(path, len(records[0].probabilities), label, scale) as out:
        for rec in records:
            out.write(rec)


def read_records(path):
    """Parse a record file back into ``(columns, coordinates, probabilities, norm_deviation)``."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing column header")
        columns = header[1:].split()
        rows = [line.split() for line in fh if line.strip() and not line.startswith("#")]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return columns, data[:, 0], data[:, 1:-1], data[:, -1]
