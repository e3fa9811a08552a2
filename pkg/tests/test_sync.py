import io
import json
import os
import zipfile
from pathlib import Path

import pytest
import yaml
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import tree_digest
from ottr.errors import OptInDisabled, StaleDownstream, UpstreamUnreachable
from ottr.lockfile import parse_lockfile
from ottr.sync import PatchSet, apply_patchset, apply_unified_diff, compute_patchset, unified_diff
from ottr.sync.patchset import _matches


def make_tree(root: Path, files: dict[str, str | bytes], manifest: dict | None = None) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    if manifest is not None:
        (root / "_ottr.yml").write_text(yaml.safe_dump(manifest), encoding="utf-8")
    for rel, data in files.items():
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(data if isinstance(data, bytes) else data.encode())
    return root


def downstream_manifest(opt_in=True, exclusions=("quizzes/*",)):
    return {"title": "Course", "chapters": ["01-intro.md"],
            "sync": {"opt_in": opt_in, "exclusions": list(exclusions)}}


BASE = {
    ".github/workflows/check.yml": "name: check\non: push\n",
    "style.css": "body{}\n",
    "quizzes/quiz_example.md": "{quiz, id: example}\n",
    "scripts/render.sh": "#!/bin/sh\necho render\n",
}


@pytest.fixture
def pair(tmp_path):
    up = make_tree(tmp_path / "up", dict(BASE, **{"01-example.md": "# Template chapter\n"}),
                   {"title": "Template", "chapters": ["01-example.md"]})
    down = make_tree(tmp_path / "down", dict(BASE, **{"01-intro.md": "# My course\n"}), downstream_manifest())
    return up, down


def edit_upstream(up: Path):
    (up / ".github/workflows/check.yml").write_text("name: check\non: [push, pull_request]\n")
    (up / "style.css").write_text("body{margin:0}\n")
    (up / "quizzes/quiz_example.md").write_text("{quiz, id: example, attempts: 2}\n")


def test_three_changes_one_excluded(pair):
    up, down = pair
    edit_upstream(up)
    p = compute_patchset(up, down)
    assert [(e.path, e.action) for e in p.entries] == [(".github/workflows/check.yml", "update"), ("style.css", "update")]


def test_identical_trees_give_empty_patchset(pair):
    up, down = pair
    assert len(compute_patchset(up, down)) == 0


def test_new_file_is_full_add(pair):
    up, down = pair
    (up / ".github/workflows/deploy.yml").write_text("name: deploy\nsteps: 2\n")
    p = compute_patchset(up, down)
    assert [(e.path, e.action) for e in p.entries] == [(".github/workflows/deploy.yml", "add")]
    diff = p.entries[0].diff
    assert diff.startswith("--- /dev/null\n+++ b/.github/workflows/deploy.yml\n@@ -0,0 +1,2 @@\n")
    assert apply_unified_diff("", diff) == "name: deploy\nsteps: 2\n"


def test_chapters_and_manifests_never_sync(pair):
    up, down = pair
    (up / "01-example.md").write_text("# Changed template chapter\n")
    (up / "_ottr.yml").write_text(yaml.safe_dump({"title": "New", "chapters": ["01-example.md"]}))
    assert len(compute_patchset(up, down)) == 0


def test_template_files_globs_limit_the_synced_set(pair):
    up, down = pair
    (up / "_ottr.yml").write_text(yaml.safe_dump(
        {"title": "T", "chapters": ["01-example.md"], "sync": {"template_files": [".github/*"]}}))
    edit_upstream(up)
    assert [e.path for e in compute_patchset(up, down).entries] == [".github/workflows/check.yml"]


def test_opt_in_required(tmp_path):
    up = make_tree(tmp_path / "up", BASE)
    down = make_tree(tmp_path / "down", BASE, downstream_manifest(opt_in=False))
    with pytest.raises(OptInDisabled) as exc:
        compute_patchset(up, down)
    assert "sync.opt_in" in str(exc.value)


def test_missing_upstream(tmp_path):
    down = make_tree(tmp_path / "down", BASE, downstream_manifest())
    with pytest.raises(UpstreamUnreachable):
        compute_patchset(tmp_path / "nowhere", down)


def test_apply_converges_and_records_upstream(pair):
    up, down = pair
    edit_upstream(up)
    p = compute_patchset(up, down)
    report = apply_patchset(p, down, "apply")
    assert report.written == 2
    assert len(compute_patchset(up, down)) == 0
    for e in p.entries:
        assert (down / e.path).read_bytes() == (up / e.path).read_bytes()
    pins = parse_lockfile((down / "_ottr.lock").read_text())
    assert pins[("@upstream", str(up))] == p.upstream_hash
    assert pins[("@template", "style.css")] == p.entries[1].new_hash
    # the excluded quiz keeps the course's own version
    assert (down / "quizzes/quiz_example.md").read_text() == "{quiz, id: example}\n"


def test_dry_run_touches_nothing(pair):
    up, down = pair
    edit_upstream(up)
    (up / "new.txt").write_text("n\n")
    before = tree_digest(down)
    report = apply_patchset(compute_patchset(up, down), down, "dry_run")
    assert [a for _, a in report.changes] == ["update", "add", "update"]
    assert tree_digest(down) == before


def test_stale_apply_changes_zero_bytes(pair):
    up, down = pair
    edit_upstream(up)
    p = compute_patchset(up, down)
    (down / "style.css").write_text("body{color:red}\n")
    before = tree_digest(down)
    with pytest.raises(StaleDownstream) as exc:
        apply_patchset(p, down, "apply")
    assert exc.value.path == "style.css"
    assert tree_digest(down) == before


def test_failure_mid_write_rolls_back(pair, monkeypatch):
    up, down = pair
    edit_upstream(up)
    (up / "docs/new/deep.txt").parent.mkdir(parents=True)
    (up / "docs/new/deep.txt").write_text("deep\n")
    p = compute_patchset(up, down)
    before = tree_digest(down)
    real_replace = os.replace
    calls = []

    def flaky(src, dst):
        calls.append(dst)
        if len(calls) == 3:
            raise OSError("disk full")
        return real_replace(src, dst)

    monkeypatch.setattr(os, "replace", flaky)
    with pytest.raises(OSError):
        apply_patchset(p, down, "apply")
    monkeypatch.undo()
    assert tree_digest(down) == before
    assert not (down / "docs").exists()


def test_delete_only_template_owned_files(pair):
    up, down = pair
    (up / "scripts/old.sh").write_text("old\n")
    apply_patchset(compute_patchset(up, down), down, "apply")
    (down / "scripts/mine.sh").write_text("author file\n")
    (up / "scripts/old.sh").unlink()
    p = compute_patchset(up, down)
    assert [(e.path, e.action) for e in p.entries] == [("scripts/old.sh", "delete")]
    apply_patchset(p, down, "apply")
    assert not (down / "scripts/old.sh").exists()
    assert (down / "scripts/mine.sh").exists()
    assert ("@template", "scripts/old.sh") not in parse_lockfile((down / "_ottr.lock").read_text())
    assert len(compute_patchset(up, down)) == 0


def test_author_edited_template_file_is_not_deleted(pair):
    up, down = pair
    (up / "scripts/old.sh").write_text("old\n")
    apply_patchset(compute_patchset(up, down), down, "apply")
    (down / "scripts/old.sh").write_text("customised\n")
    (up / "scripts/old.sh").unlink()
    assert len(compute_patchset(up, down)) == 0


def test_binary_files(pair):
    up, down = pair
    (up / "img/logo.png").parent.mkdir()
    (up / "img/logo.png").write_bytes(b"\x89PNG\xff\x00binary")
    p = compute_patchset(up, down)
    assert p.entries[0].diff == "Binary files /dev/null and b/img/logo.png differ\n"
    restored = PatchSet.from_json(p.to_json())
    apply_patchset(restored, down, "apply")
    assert (down / "img/logo.png").read_bytes() == b"\x89PNG\xff\x00binary"


def test_serialization(pair, tmp_path):
    up, down = pair
    edit_upstream(up)
    p = compute_patchset(up, down, clock=lambda: 0)
    js, df = p.write(tmp_path / "patch")
    data = json.loads(js.read_text())
    assert list(data) == ["upstream_ref", "upstream", "upstream_hash", "created_at", "entries"]
    assert data["created_at"] == "1970-01-01T00:00:00Z"
    assert list(data["entries"][0]) == ["path", "action", "old_hash", "new_hash", "diff"]
    assert df.read_text() == "".join(e.diff for e in p.entries)
    assert PatchSet.from_json(js.read_text()) == p


def test_archive_url_upstream(pair, tmp_path, http_server):
    up, down = pair
    edit_upstream(up)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for path in sorted(up.rglob("*")):
            if path.is_file():
                zf.writestr(f"template-main/{path.relative_to(up).as_posix()}", path.read_bytes())
    http_server.routes["/template.zip"] = (200, buf.getvalue())
    p = compute_patchset(http_server.base + "/template.zip", down)
    assert [e.path for e in p.entries] == [".github/workflows/check.yml", "style.css"]
    with pytest.raises(UpstreamUnreachable):
        compute_patchset(http_server.base + "/missing.zip", down)


def test_diff_round_trip_edge_cases():
    cases = [("", "a"), ("a", ""), ("a\nb", "a\nb\n"), ("x\r\ny\n", "x\r\nz\n"), ("1\n2\n3\n4\n5\n6\n7\n8\n9\n", "1\n2\nX\n4\n5\n6\n7\nY\n9\n")]
    for old, new in cases:
        assert apply_unified_diff(old, unified_diff(old, new, "f")) == new


_paths = st.sampled_from([
    "quizzes/a.md", "quizzes/b.md", ".github/workflows/ci.yml", "style.css", "docs/x.txt", "docs/deep/y.txt",
    "scripts/run.sh", "img/a.png", "notes.md", "data/table.csv",
])
_globs = st.lists(st.sampled_from(["quizzes/*", "*.css", "docs/*", ".github/*", "*.png", "scripts/run.sh", "*/deep/*", "n*"]),
                  max_size=3, unique=True)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(up_files=st.dictionaries(_paths, st.sampled_from(["a\n", "b\n", "c\n"])),
       down_files=st.dictionaries(_paths, st.sampled_from(["a\n", "b\n"])),
       exclusions=_globs)
def test_exclusion_totality_and_convergence(tmp_path_factory, up_files, down_files, exclusions):
    base = tmp_path_factory.mktemp("prop")
    up = make_tree(base / "up", up_files)
    down = make_tree(base / "down", down_files, downstream_manifest(exclusions=exclusions))
    p = compute_patchset(up, down)
    assert [e.path for e in p.entries] == sorted(e.path for e in p.entries)
    assert not any(_matches(e.path, exclusions) for e in p.entries)
    apply_patchset(p, down, "apply")
    assert len(compute_patchset(up, down)) == 0
    for rel, data in up_files.items():
        if not _matches(rel, exclusions):
            assert (down / rel).read_text() == data
