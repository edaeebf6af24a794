"""Regenerate src/implang/data/natural_en.txt.gz from CPython docstrings.

The fixture is English prose from the CPython (PSF license) and
numpy/scipy/scikit-learn/statsmodels (BSD) docstrings. Sentences are tokenized into words and punctuation, deduplicated
and kept in a fixed order so the file is identical for a given Python
minor version.
"""

import gzip
import importlib
import inspect
import pkgutil
import re
import sys
import warnings
from pathlib import Path

EXTRA = ("numpy", "scipy", "sklearn", "statsmodels")
TARGET_TOKENS = 150_000
SKIP = ("test", "idlelib", "tkinter", "turtledemo", "lib2to3", "ensurepip", "antigravity", "this")
TOKEN = re.compile(r"[A-Za-z]+(?:'[a-z]+)?|[0-9]+|[.,;:?!()]")


def module_names():
    yield from sorted(m.name for m in pkgutil.iter_modules() if m.name in sys.stdlib_module_names)
    for pkg in EXTRA:
        mod = importlib.import_module(pkg)
        yield pkg
        for info in sorted(pkgutil.walk_packages(mod.__path__, pkg + ".", onerror=lambda _: None),
                           key=lambda m: m.name):
            if ".tests" in info.name or "._" in info.name or info.name.endswith(".conftest"):
                continue
            yield info.name


def docstrings():
    import pydoc_data.topics

    for key in sorted(pydoc_data.topics.topics):
        yield pydoc_data.topics.topics[key]
    for name in module_names():
        if name.startswith("_") or name in SKIP:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                mod = importlib.import_module(name)
            except Exception:
                continue
        yield mod.__doc__ or ""
        for _, obj in sorted(vars(mod).items()):
            if getattr(obj, "__module__", None) != name or not (inspect.isclass(obj) or inspect.isroutine(obj)):
                continue
            yield inspect.getdoc(obj) or ""
            if inspect.isclass(obj):
                for _, meth in sorted(vars(obj).items()):
                    yield inspect.getdoc(meth) or "" if inspect.isfunction(meth) else ""


def prose_lines(doc):
    para = []
    for line in doc.splitlines():
        s = line.strip()
        if not s or s.startswith((">>>", "...", "*", "-", "=", "+", "|", ".. ")) or s.endswith(":"):
            if para:
                yield " ".join(para)
                para = []
            continue
        para.append(s)
    if para:
        yield " ".join(para)


def sentences():
    seen = set()
    for doc in docstrings():
        for para in prose_lines(doc):
            for sent in re.split(r"(?<=[.?!])\s+(?=[A-Z])", para):
                if re.search(r"[_=<>{}\[\]#@/\\`*]|\w\.\w|\(\)", sent):
                    continue
                toks = TOKEN.findall(sent)
                words = [t for t in toks if t[0].isalpha()]
                if not 6 <= len(toks) <= 40 or len(words) < 0.75 * len(toks):
                    continue
                if not toks[0][0].isupper() or toks[-1] not in ".?!":
                    continue
                text = " ".join(toks)
                if text not in seen:
                    seen.add(text)
                    yield text


def main(out):
    lines, total = [], 0
    for text in sentences():
        lines.append(text)
        total += len(text.split())
        if total >= TARGET_TOKENS:
            break
    data = ("\n".join(lines) + "\n").encode("utf-8")
    with open(out, "wb") as fh:
        with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0, filename="") as gz:
            gz.write(data)
    print(f"{len(lines)} sentences, {sum(len(l.split()) for l in lines)} tokens -> {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "src/implang/data/natural_en.txt.gz")
