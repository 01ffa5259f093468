"""Writes the adversarial comment-lexer fixtures (50 .tex files)."""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/lexer"

HAND = [
    "plain % comment\nnext line\n",
    "50\\% of cases % but this is a comment\n",
    "line break \\\\% comment after a double backslash\n",
    "three \\\\\\% escaped again % real one\n",
    "four \\\\\\\\% comment\n",
    "\\verb|%not a comment| % a comment\n",
    "\\verb*+50% off+ tail % c\n",
    "\\verb|unclosed % still verbatim\nafter % c\n",
    "\\begin{verbatim}\n% inside verbatim\n\\end{verbatim}\n% after\n",
    "\\begin{verbatim*}\n%x\n\\end{verbatim*} % trailing\n",
    "\\begin{lstlisting}\nprint('%d' % 3)\n\\end{lstlisting}\n",
    "\\begin{minted}{python}\nx = 1 % 2\n\\end{minted}\n",
    "\\begin{comment}\nsecret plans\n\\end{comment}\nvisible\n",
    "\\begin{comment}\nnever closed\n% inner\n",
    "\\begin{verbatim}\nnever closed % here\n",
    "% \\begin{verbatim}\n% still a comment\n",
    "\\begin {verbatim}\n%x\n\\end{verbatim}\n",
    "\\begin\t{comment}x\\end{comment}% after\n",
    "crlf % comment\r\nnext\r\n",
    "unicode caf\u00e9 % comment \u00fcber\n\u00e9\\%\u00e9 % c\n",
    "\\verb\u00e9%\u00e9 text % c\n",
    "\\verbatim % a control word, not verb\n",
    "\\verb\n% verb at end of line\n",
    "\\begin{Verbatim}\n%\n\\end{verbatim}\n%\n\\end{Verbatim}\n%c\n",
    "\\begin{comment}\\begin{verbatim}%\\end{comment}%after\n",
    "%%%%% decorative\n%\n",
    "\\\\\\\\\\\\\\\\%\n",
    "text\\",
    "\\%\\%\\% no comments at all\n",
    "\\begin{BVerbatim}%\\end{BVerbatim}% yes\n",
]

PIECES = [
    "%", "\\%", "\\\\", "\\", "\\verb|", "|", "\\verb*!", "!", "\\verb+", "+",
    "\\begin{verbatim}", "\\end{verbatim}", "\\begin{comment}", "\\end{comment}",
    "\\begin{lstlisting}", "\\end{lstlisting}", "\\begin {minted}", "\\end{minted}",
    "\\begin{LVerbatim}", "\\end{LVerbatim}", "\\input{a}", "\\verbatim", "\\begin{figure}",
    "\n", "\n", "\r\n", " ", "text", "x", "\u00e9", "\u2013", "{", "}", "$", "\t",
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.tex"):
        old.unlink()
    rng = random.Random(20240601)
    docs = list(HAND)
    while len(docs) < 50:
        n = rng.randint(20, 80)
        docs.append("".join(rng.choice(PIECES) for _ in range(n)))
    for i, d in enumerate(docs, 1):
        (OUT / f"adv{i:02d}.tex").write_bytes(d.encode("utf-8"))


if __name__ == "__main__":
    main()
