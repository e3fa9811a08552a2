"""Starter course generation for ``ottr new``."""

from __future__ import annotations

from pathlib import Path

from .errors import DestinationNotEmpty, UsageError
from .manifest import MANIFEST_NAME, ChapterEntry, Contributor, CourseManifest, render_manifest

PLACEHOLDER_BASE_URL = "https://example.org/my-course"
PLACEHOLDER_FEEDBACK_URL = "https://example.org/my-course/feedback"
QUIZ_ID = "quiz_intro"

_INTRO = """\
# Introduction

Welcome to this course. Every chapter is a plain text file written in markdown,
and one build turns the whole course into a website, a book manuscript and
pages ready to embed on a course platform.

## How to edit

Change the text in this file, then run the build again:

```
ottr build --target all
```

- Chapters are listed in order in the manifest file.
- Quizzes live in the quizzes folder.
- Words the spelling check should accept go in the dictionary file.

When you are ready, move on to the [next chapter](02-next-steps.md).

<!-- quiz: {quiz_id} -->
"""

_NEXT = """\
# Next steps

Add a new chapter by creating a markdown file and adding it to the chapter
list in the manifest. Run the checks at any time:

```
ottr check
```

The check report is written to the reports folder. Fix anything it lists
before you publish, or go back to the [introduction](01-introduction.md).
"""

_QUIZ = """\
{{quiz, id: {quiz_id}, attempts: 2}}

? Which file lists the chapters of the course?
a) The dictionary file
B) The manifest file
c) The check report

? Which command builds every target at once?
! ottr build --target all
! ottr build

{{/quiz}}
"""

_DICTIONARY = """\
# Project words accepted by the spelling check, one per line.
ottr
"""

_FEEDBACK = """\
---
name: Course feedback
about: Tell the course authors what worked and what did not
---

Which chapter is this about?

What could be better?
"""


def scaffold_manifest(title: str) -> CourseManifest:
    return CourseManifest(
        title=title,
        chapters=(ChapterEntry(source="01-introduction.md"), ChapterEntry(source="02-next-steps.md")),
        url_exclusions=("*example.org*",),
        feedback_url=PLACEHOLDER_FEEDBACK_URL,
        base_url=PLACEHOLDER_BASE_URL,
        credits=(Contributor("Your Name", ("Content author", "Content editor")),),
    )


def scaffold_course(dest: str | Path, title: str) -> list[Path]:
    """Create a runnable starter course in ``dest`` and return the created files."""
    dest = Path(dest)
    if not title or not title.strip():
        raise UsageError("a course title is required")
    if dest.exists() and (not dest.is_dir() or any(dest.iterdir())):
        raise DestinationNotEmpty(dest)
    files = {
        MANIFEST_NAME: render_manifest(scaffold_manifest(title.strip())),
        "01-introduction.md": _INTRO.replace("{quiz_id}", QUIZ_ID),
        "02-next-steps.md": _NEXT,
        f"quizzes/{QUIZ_ID}.md": _QUIZ.format(quiz_id=QUIZ_ID),
        "dictionary.txt": _DICTIONARY,
        ".github/ISSUE_TEMPLATE/course-feedback.md": _FEEDBACK,
    }
    created = []
    for rel, text in files.items():
        path = dest / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        created.append(path)
    return created
