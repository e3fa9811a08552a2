import hashlib
import http.server
import random
import threading
from pathlib import Path

import pytest
import yaml

from ottr.quiz import FILL_IN_BLANK, MULTIPLE_CHOICE, Choice, Question, Quiz


def write_course(root: Path, manifest: dict, files: dict[str, str | bytes]) -> Path:
    """Lay out a course tree; ``files`` maps relative paths to contents."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "_ottr.yml").write_text(yaml.safe_dump(manifest, sort_keys=False), encoding="utf-8")
    for rel, data in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            path.write_text(data, encoding="utf-8")
    return root


def tree_digest(root: Path, skip=()) -> str:
    """Hash of every file path and its bytes under ``root``."""
    h = hashlib.sha256()
    for path in sorted(p for p in Path(root).rglob("*") if p.is_file()):
        rel = path.relative_to(root).as_posix()
        if any(rel == s or rel.startswith(s + "/") for s in skip):
            continue
        h.update(rel.encode() + b"\0" + path.read_bytes() + b"\0")
    return h.hexdigest()


def tree_files(root: Path) -> dict[str, bytes]:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(Path(root).rglob("*")) if p.is_file()}


_WORDS = "alpha beta gamma delta river stone cloud apple tiger lemon paper glass music table window".split()


def _phrase(rng: random.Random, lo=1, hi=6) -> str:
    words = [rng.choice(_WORDS) for _ in range(rng.randint(lo, hi))]
    # punctuation and digits that must survive the round trip untouched
    if rng.random() < 0.3:
        words.append(rng.choice(["2 + 2?", "(x)", "a, b", "50%", "it's", "C++", "x = y"]))
    return " ".join(words)


def random_quiz(rng: random.Random, qid: str) -> Quiz:
    questions = []
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.7:
            n = rng.randint(2, 6)
            correct = [rng.random() < 0.35 for _ in range(n)]
            if not any(correct):
                correct[rng.randrange(n)] = True
            choices = tuple(Choice("abcdefghij"[i], _phrase(rng), c) for i, c in enumerate(correct))
            questions.append(Question(MULTIPLE_CHOICE, _phrase(rng, 2, 12), choices, (), rng.random() < 0.8))
        else:
            answers = tuple(_phrase(rng, 1, 3) for _ in range(rng.randint(1, 4)))
            questions.append(Question(FILL_IN_BLANK, _phrase(rng, 2, 12), (), answers, False))
    attempts = rng.choice([None, 1, 2, 3, 10])
    return Quiz(qid, tuple(questions), attempts)


class _Handler(http.server.BaseHTTPRequestHandler):
    routes: dict = {}

    def _reply(self, body: bool):
        status, data = self.routes.get(self.path, (404, b"missing"))
        self.send_response(status)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        if body:
            self.wfile.write(data)

    def do_GET(self):
        self._reply(True)

    def do_HEAD(self):
        self._reply(False)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    """Local HTTP server; set ``server.routes[path] = (status, bytes)``."""
    handler = type("H", (_Handler,), {"routes": {}})
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server.routes = handler.routes
    server.base = f"http://127.0.0.1:{server.server_address[1]}"
    yield server
    server.shutdown()
    server.server_close()


PNG = bytes.fromhex("89504e470d0a1a0a0000000d4948445200000001000000010806000000")  # truncated header is enough here

QUIZ_ONE = "{quiz, id: quiz_one, attempts: 2}\n\n? Which river is longest?\na) Thames\nB) Nile\nc) Seine\n\n{/quiz}\n"
QUIZ_TWO = "{quiz, id: quiz_two}\n\n? Name the red planet.\n! Mars\n! mars\n\n? Pick both colors.\nA) Red\nb) Round\nC) Blue\n\n{/quiz}\n"


def fixture_course(tmp_path: Path, borrow_origin: str | None = None, **manifest_extra) -> Path:
    """Three chapters (one borrowed), two quizzes, an image, credits and a slide embed."""
    other = tmp_path / "other-course"
    if borrow_origin is None:
        other.mkdir(parents=True, exist_ok=True)
        (other / "03-shared.md").write_text(
            "# Shared material\n\nThis chapter is maintained in another course.\n\n"
            "![A shared diagram](img/shared.png)\n", encoding="utf-8")
        (other / "img").mkdir(exist_ok=True)
        (other / "img" / "shared.png").write_bytes(PNG + b"shared")
        borrow_origin = "../other-course"
    manifest = {
        "title": "Fixture Course",
        "chapters": [
            {"source": "01-intro.md"},
            {"source": "02-methods.md"},
            {"borrow": {"origin": borrow_origin, "file": "03-shared.md"}},
        ],
        "feedback_url": "https://forms.example/feedback",
        "base_url": "https://course.example/site",
        "credits": [
            {"name": "Ana Lima", "roles": ["Content author", "Technical review"]},
            {"name": "Bo Chen", "roles": ["Content editor"]},
        ],
        "url_exclusions": ["*example*"],
    }
    manifest.update(manifest_extra)
    files = {
        "01-intro.md": (
            "# Introduction\n\nWelcome to the course. Read the [methods](02-methods.md#data) next.\n\n"
            "![A small logo](img/logo.png)\n\n<!-- quiz: quiz_one -->\n"
        ),
        "02-methods.md": (
            "# Methods\n\n## Data\n\nWe use plain tables.\n\n```python\nprint('code stays code')\n```\n\n"
            "![A slide about tables](slides://deck1/s2)\n\n<!-- quiz: quiz_two -->\n"
        ),
        "img/logo.png": PNG + b"logo",
        "quizzes/quiz_one.md": QUIZ_ONE,
        "quizzes/quiz_two.md": QUIZ_TWO,
        "dictionary.txt": "# course words\n",
    }
    return write_course(tmp_path / "course", manifest, files)


# (criterion number, description, passed, measured detail), filled by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
