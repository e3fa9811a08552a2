"""Quiz DSL: parsing, validation, canonical rendering and quiz-bank conversion.

Source grammar::

    {quiz, id: quiz_01, attempts: 3}

    ? What is 2 + 2?
    a) 3
    B) 4

    {shuffle: false}
    ? Pick both primes.
    A) 2
    B) 3
    c) 4

    ? Capital of France?
    ! Paris
    ! paris

    {/quiz}

An uppercase choice letter marks a correct choice; ``!`` lines list accepted
answers for a fill-in-the-blank question. A prompt may run over several
lines and is joined with single spaces.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import UnconvertibleQuiz

MULTIPLE_CHOICE = "multiple_choice"
FILL_IN_BLANK = "fill_in_blank"

_HEADER = re.compile(r"^\{quiz(?:\s*,\s*(?P<attrs>.*?))?\s*\}\s*$")
_FOOTER = re.compile(r"^\{/quiz\}\s*$")
_ATTR_LINE = re.compile(r"^\{\s*(?P<key>[a-z_]+)\s*:\s*(?P<value>[^}]*?)\s*\}\s*$")
_QUESTION = re.compile(r"^\?\s*(?P<text>.*?)\s*$")
_CHOICE = re.compile(r"^(?P<label>[A-Za-z])\)\s*(?P<text>.*?)\s*$")
_ANSWER = re.compile(r"^!\s*(?P<text>.*?)\s*$")
_IDENT = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class Choice:
    label: str
    text: str
    correct: bool


@dataclass(frozen=True)
class Question:
    kind: str
    prompt: str
    choices: tuple[Choice, ...] = ()
    accepted_answers: tuple[str, ...] = ()
    shuffle: bool = True
    line: int = field(default=0, compare=False)

    @property
    def correct_labels(self) -> frozenset[str]:
        return frozenset(c.label for c in self.choices if c.correct)


@dataclass(frozen=True)
class Quiz:
    id: str
    questions: tuple[Question, ...]
    attempts: int | None = None
    source_path: str = field(default="", compare=False)
    line: int = field(default=1, compare=False)


@dataclass(frozen=True)
class QuizDiagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    path: str
    line: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.severity}: {self.code}: {self.message}"


@dataclass
class _Draft:
    line: int
    prompt: list[str] = field(default_factory=list)
    choices: list[tuple[str, str, int]] = field(default_factory=list)  # (raw label, text, line)
    answers: list[tuple[str, int]] = field(default_factory=list)
    shuffle: bool | None = None
    shuffle_line: int = 0


class _QuizParser:
    def __init__(self, path: str):
        self.path = path
        self.diags: list[QuizDiagnostic] = []

    def error(self, code, line, message):
        self.diags.append(QuizDiagnostic("error", code, message, self.path, line))

    def warn(self, code, line, message):
        self.diags.append(QuizDiagnostic("warning", code, message, self.path, line))

    def parse(self, raw: str) -> Quiz:
        lines = raw.replace("\r\n", "\n").replace("\r", "\n").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        i = 0
        while i < len(lines) and not lines[i].strip():
            i += 1
        quiz_id, attempts, header_line = "", None, i + 1
        m = _HEADER.match(lines[i].strip()) if i < len(lines) else None
        if m:
            quiz_id, attempts = self._header(m.group("attrs") or "", i + 1)
            i += 1
        else:
            self.error("MissingQuizHeader", min(i + 1, max(len(lines), 1)),
                       "file must start with a '{quiz, id: <name>}' header")

        questions: list[Question] = []
        draft: _Draft | None = None
        pending_shuffle: tuple[bool, int] | None = None
        footer_seen = False
        while i < len(lines):
            no = i + 1
            line = lines[i].strip()
            i += 1
            if _FOOTER.match(line):
                footer_seen = True
                break
            if not line:
                if draft is not None and (draft.choices or draft.answers):
                    questions.append(self._finish(draft))
                    draft = None
                continue
            m = _QUESTION.match(line)
            if m:
                if draft is not None:
                    questions.append(self._finish(draft))
                draft = _Draft(no)
                if m.group("text"):
                    draft.prompt.append(m.group("text"))
                if pending_shuffle is not None:
                    draft.shuffle, draft.shuffle_line = pending_shuffle
                    pending_shuffle = None
                continue
            m = _ATTR_LINE.match(line)
            if m and (draft is None or not draft.prompt or draft.choices or draft.answers):
                if m.group("key") != "shuffle" or m.group("value").lower() not in ("true", "false"):
                    self.warn("UnknownAttribute", no, f"ignored attribute line {line!r}")
                    continue
                if draft is not None:
                    questions.append(self._finish(draft))
                    draft = None
                pending_shuffle = (m.group("value").lower() == "true", no)
                continue
            m = _CHOICE.match(line)
            if m:
                if draft is None:
                    self.error("EmptyPrompt", no, "choice appears before any '? ' question line")
                    draft = _Draft(no)
                draft.choices.append((m.group("label"), m.group("text") or "", no))
                continue
            m = _ANSWER.match(line)
            if m:
                if draft is None:
                    self.error("EmptyPrompt", no, "answer appears before any '? ' question line")
                    draft = _Draft(no)
                draft.answers.append((m.group("text") or "", no))
                continue
            # free text continues whatever is open
            if draft is None:
                self.warn("StrayText", no, "text outside a question is ignored")
            elif draft.answers and (not draft.choices or draft.answers[-1][1] > draft.choices[-1][2]):
                text, ln = draft.answers[-1]
                draft.answers[-1] = (f"{text} {line}".strip(), ln)
            elif draft.choices:
                label, text, ln = draft.choices[-1]
                draft.choices[-1] = (label, f"{text} {line}".strip(), ln)
            else:
                draft.prompt.append(line)
        if draft is not None:
            questions.append(self._finish(draft))
        if pending_shuffle is not None:
            self.warn("UnknownAttribute", pending_shuffle[1], "shuffle attribute not followed by a question")
        if not footer_seen:
            self.error("MissingFooter", max(len(lines), 1), "quiz is not closed with '{/quiz}'")
        else:
            for j in range(i, len(lines)):
                if lines[j].strip():
                    self.warn("TrailingContent", j + 1, "content after '{/quiz}' is ignored")
                    break
        if not questions:
            self.error("NoQuestions", header_line, "quiz has no questions")
        return Quiz(quiz_id, tuple(questions), attempts, self.path, header_line)

    def _header(self, attrs: str, no: int) -> tuple[str, int | None]:
        quiz_id, attempts = "", None
        for part in filter(None, (p.strip() for p in attrs.split(","))):
            key, sep, value = (s.strip() for s in part.partition(":"))
            if not sep:
                self.warn("UnknownAttribute", no, f"header attribute {part!r} has no value")
            elif key == "id":
                quiz_id = value
            elif key == "attempts":
                if value.isdigit() and int(value) > 0:
                    attempts = int(value)
                else:
                    self.error("MissingQuizHeader", no, f"attempts must be a positive integer, got {value!r}")
            else:
                self.warn("UnknownAttribute", no, f"unknown header attribute {key!r}")
        if not quiz_id or not _IDENT.match(quiz_id):
            self.error("MissingQuizHeader", no, "header needs 'id: <name>' (letters, digits, '_', '-', '.')")
        return quiz_id, attempts

    def _finish(self, d: _Draft) -> Question:
        prompt = " ".join(p.strip() for p in d.prompt if p.strip())
        if not prompt:
            self.error("EmptyPrompt", d.line, "question has no prompt text")
        if d.choices and d.answers:
            self.error("MixedKinds", d.line, "question mixes lettered choices and '!' answers")
        if not d.choices and not d.answers:
            self.error("MissingAnswers", d.line, "question has neither choices nor accepted answers")
        if d.answers and not d.choices:
            for text, ln in d.answers:
                if not text:
                    self.error("EmptyChoice", ln, "accepted answer is empty")
            if d.shuffle is not None:
                self.warn("UnknownAttribute", d.shuffle_line, "shuffle has no effect on fill-in-the-blank questions")
            return Question(FILL_IN_BLANK, prompt, accepted_answers=tuple(t for t, _ in d.answers),
                            shuffle=False, line=d.line)
        seen: set[str] = set()
        prev = ""
        for raw_label, text, ln in d.choices:
            label = raw_label.lower()
            if label in seen:
                self.error("DuplicateChoiceLabel", ln, f"choice label {label!r} used twice in one question")
            elif label < prev:
                self.warn("LabelOrder", ln, f"choice {label!r} is out of alphabetical order")
            seen.add(label)
            prev = max(prev, label)
            if not text:
                self.error("EmptyChoice", ln, "choice has no text")
        if d.choices:
            if len(d.choices) < 2:
                self.error("TooFewChoices", d.line, "a multiple-choice question needs at least two choices")
            if not any(lbl.isupper() for lbl, _, _ in d.choices):
                self.error("NoCorrectChoice", d.line, "no choice is marked correct (use an uppercase letter)")
        choices = tuple(Choice(lbl.lower(), text, lbl.isupper()) for lbl, text, _ in d.choices)
        return Question(MULTIPLE_CHOICE, prompt, choices=choices,
                        shuffle=True if d.shuffle is None else d.shuffle, line=d.line)


def parse_quiz(raw: str, path: str = "<quiz>") -> tuple[Quiz, list[QuizDiagnostic]]:
    parser = _QuizParser(str(path))
    quiz = parser.parse(raw)
    return quiz, sorted(parser.diags, key=lambda d: d.line)


def has_errors(diagnostics: Iterable[QuizDiagnostic]) -> bool:
    return any(d.severity == "error" for d in diagnostics)


def invariant_violations(q: Quiz) -> list[str]:
    """Structural problems that make a quiz unpublishable, independent of its source text."""
    problems = []
    if not q.id:
        problems.append("quiz id is empty")
    if not q.questions:
        problems.append("quiz has no questions")
    if q.attempts is not None and q.attempts < 1:
        problems.append("attempts must be positive")
    for n, question in enumerate(q.questions, 1):
        if not question.prompt:
            problems.append(f"question {n}: empty prompt")
        if question.kind == MULTIPLE_CHOICE:
            labels = [c.label for c in question.choices]
            if len(labels) < 2:
                problems.append(f"question {n}: fewer than two choices")
            if len(set(labels)) != len(labels):
                problems.append(f"question {n}: duplicate choice labels")
            if not any(c.correct for c in question.choices):
                problems.append(f"question {n}: no correct choice")
            if question.accepted_answers:
                problems.append(f"question {n}: mixes choices and answers")
        elif question.kind == FILL_IN_BLANK:
            if not question.accepted_answers:
                problems.append(f"question {n}: no accepted answers")
            if question.choices:
                problems.append(f"question {n}: mixes choices and answers")
        else:
            problems.append(f"question {n}: unknown kind {question.kind!r}")
    return problems


@dataclass
class QuizContext:
    """Course-wide view used for cross-file quiz rules."""

    quizzes: list[Quiz]
    referenced_ids: set[str]


def validate_quiz(q: Quiz, context: QuizContext) -> list[QuizDiagnostic]:
    diags = []
    for other in context.quizzes:
        if other.id == q.id:
            if other.source_path != q.source_path:
                diags.append(QuizDiagnostic(
                    "error", "DuplicateQuizId", f"quiz id {q.id!r} is already used by {other.source_path}",
                    q.source_path, q.line,
                ))
            break
    if q.id not in context.referenced_ids:
        diags.append(QuizDiagnostic(
            "warning", "OrphanQuiz", f"quiz {q.id!r} is not referenced by any chapter",
            q.source_path, q.line,
        ))
    return diags


def render_leanpub_quiz(q: Quiz) -> str:
    """Canonical DSL text for a quiz (LF endings, one blank line between questions)."""
    header = f"{{quiz, id: {q.id}" + (f", attempts: {q.attempts}" if q.attempts is not None else "") + "}"
    blocks = []
    for question in q.questions:
        lines = []
        if question.kind == MULTIPLE_CHOICE and not question.shuffle:
            lines.append("{shuffle: false}")
        lines.append(f"? {question.prompt}")
        if question.kind == MULTIPLE_CHOICE:
            lines.extend(f"{c.label.upper() if c.correct else c.label.lower()}) {c.text}" for c in question.choices)
        else:
            lines.extend(f"! {a}" for a in question.accepted_answers)
        blocks.append("\n".join(lines))
    return header + "\n\n" + "\n\n".join(blocks) + "\n\n{/quiz}\n"


def convert_to_coursera(q: Quiz) -> dict:
    """Quiz-bank entry for one quiz; key order is part of the output format."""
    problems = invariant_violations(q)
    if problems:
        raise UnconvertibleQuiz(f"quiz {q.id or q.source_path!r} cannot be converted: " + "; ".join(problems))
    questions = []
    for question in q.questions:
        if question.kind == MULTIPLE_CHOICE:
            n_correct = sum(c.correct for c in question.choices)
            questions.append({
                "type": "multipleChoice" if n_correct == 1 else "checkbox",
                "prompt": question.prompt,
                "shuffle": question.shuffle,
                "options": [{"text": c.text, "correct": c.correct} for c in question.choices],
            })
        else:
            questions.append({
                "type": "textExactMatch",
                "prompt": question.prompt,
                "shuffle": False,
                "acceptedAnswers": list(question.accepted_answers),
            })
    return {"id": q.id, "attempts": q.attempts, "questions": questions}


def quiz_bank_json(quizzes: Iterable[Quiz]) -> str:
    bank = {"quizzes": [convert_to_coursera(q) for q in quizzes]}
    return json.dumps(bank, indent=2, ensure_ascii=False) + "\n"
