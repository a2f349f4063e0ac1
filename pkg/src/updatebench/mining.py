"""Mining method-level update pairs from git history.

Walks the first-parent chain of a repository, diffs .java files of each
non-merge commit against its parent, and pairs changed methods by
(name, param_count). File renames are followed via git's rename detection.
"""

from __future__ import annotations

import logging
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import RepoError, UpdateBenchError
from .javalite import MethodSpan, extract_methods, lex, strip_comments

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MethodPairTriplet:
    repo_id: str
    commit_hash: str
    commit_time: datetime
    message: str
    prior: tuple[str, ...]
    updated: tuple[str, ...]
    file_path: str

    def __post_init__(self):
        if self.prior == self.updated:
            raise UpdateBenchError("triplet requires prior != updated")


@dataclass
class FilterPolicy:
    max_method_tokens: int = 50
    max_changed_tokens: int = 5
    enabled: bool = True

    def __post_init__(self):
        if self.max_method_tokens <= 0 or self.max_changed_tokens <= 0:
            raise ValueError("filter maxima must be positive")


class PairedMethod(NamedTuple):
    name: str
    prior: tuple[str, ...]
    updated: tuple[str, ...]


def _git(repo: str | Path, *args: str) -> str:
    try:
        out = subprocess.run(
            ["git", "-C", str(repo), *args],
            capture_output=True,
            check=True,
        )
    except FileNotFoundError as e:
        raise RepoError("git executable not found") from e
    except subprocess.CalledProcessError as e:
        raise RepoError(f"git {' '.join(args[:2])} failed in {repo}: {e.stderr.decode(errors='replace').strip()}") from e
    return out.stdout.decode("utf-8", errors="replace")


def method_tokens(source: str, span: MethodSpan) -> tuple[str, ...]:
    """Token texts of the full method (signature through closing brace)."""
    return tuple(t.text for t in lex(span.text(source)))


def pair_methods(
    before: Sequence[tuple[MethodSpan, tuple[str, ...]]],
    after: Sequence[tuple[MethodSpan, tuple[str, ...]]],
) -> list[PairedMethod]:
    """Match methods across two file versions by (name, param_count).

    Emits a pair only when the token sequences differ. Added, deleted and
    renamed methods have no match and are dropped; ambiguous keys (same
    name and arity more than once on either side) are dropped entirely.
    """

    def index(side):
        table: dict[tuple[str, int], tuple[MethodSpan, tuple[str, ...]]] = {}
        ambiguous: set[tuple[str, int]] = set()
        for span, toks in side:
            key = (span.name, span.param_count)
            if key in table:
                ambiguous.add(key)
            else:
                table[key] = (span, toks)
        return table, ambiguous

    before_tab, before_amb = index(before)
    after_tab, after_amb = index(after)
    ambiguous = before_amb | after_amb
    for key in sorted(ambiguous):
        log.warning("dropping ambiguous method %s/%d (duplicate name+arity)", *key)
    pairs = []
    for span, prior_toks in before:
        key = (span.name, span.param_count)
        if key in ambiguous or key not in after_tab:
            continue
        updated_toks = after_tab[key][1]
        if prior_toks != updated_toks:
            pairs.append(PairedMethod(span.name, prior_toks, updated_toks))
    return pairs


def changed_token_count(prior: Sequence[str], updated: Sequence[str]) -> int:
    """Levenshtein distance over token texts (substitution costs 1)."""
    a, b = list(prior), list(updated)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ta in enumerate(a, 1):
        cur = [i]
        for j, tb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ta != tb)))
        prev = cur
    return prev[-1]


def filter_small(triplets: Iterable[MethodPairTriplet], policy: FilterPolicy) -> list[MethodPairTriplet]:
    """Keep only pairs under the size and edit-distance caps (strict <)."""
    triplets = list(triplets)
    if not policy.enabled:
        return triplets
    kept = []
    for t in triplets:
        if len(t.prior) >= policy.max_method_tokens or len(t.updated) >= policy.max_method_tokens:
            continue
        if changed_token_count(t.prior, t.updated) >= policy.max_changed_tokens:
            continue
        kept.append(t)
    return kept


def dedupe(triplets: Iterable[MethodPairTriplet]) -> list[MethodPairTriplet]:
    """Remove repeated (prior, updated) pairs; earliest commit_time wins.

    Output preserves the input order of the surviving occurrences.
    """
    triplets = list(triplets)
    best: dict[tuple, int] = {}
    for idx, t in enumerate(triplets):
        key = (t.prior, t.updated)
        if key not in best:
            best[key] = idx
        else:
            cur = triplets[best[key]]
            if (t.commit_time, idx) < (cur.commit_time, best[key]):
                best[key] = idx
    winners = set(best.values())
    return [t for idx, t in enumerate(triplets) if idx in winners]


def _parse_file_versions(status_line: str) -> tuple[str, str] | None:
    """(before_path, after_path) for a modified/renamed .java file."""
    parts = status_line.split("\t")
    status = parts[0]
    if status.startswith("M") and len(parts) == 2:
        path = parts[1]
        return (path, path) if path.endswith(".java") else None
    if status.startswith("R") and len(parts) == 3:
        old, new = parts[1], parts[2]
        return (old, new) if old.endswith(".java") and new.endswith(".java") else None
    return None


def _file_pairs(repo: str | Path, before_src: str, after_src: str, commit: str, path: str) -> list[PairedMethod]:
    def spans_with_tokens(src: str):
        stripped = strip_comments(src)
        return [(s, method_tokens(stripped, s)) for s in extract_methods(stripped)]

    try:
        before = spans_with_tokens(before_src)
        after = spans_with_tokens(after_src)
    except UpdateBenchError as e:
        log.warning("skipping %s at %s in %s: %s", path, commit[:10], repo, e)
        return []
    return pair_methods(before, after)


def mine_repo(
    repo_path: str | Path,
    since: datetime | None = None,
    until: datetime | None = None,
) -> list[MethodPairTriplet]:
    """Mine every changed method of each first-parent, non-merge commit.

    Files that fail comment stripping, lexing or method extraction are
    skipped with a warning; the commit itself is never aborted. Output is
    sorted by (commit_time, file_path, method name) and deterministic for
    a fixed repository state.
    """
    if "://" in str(repo_path):
        raise RepoError(f"{repo_path}: remote URLs are not supported; clone locally first")
    repo_path = Path(repo_path)
    if since is not None and until is not None and since > until:
        raise ValueError("since must be <= until")
    if not (repo_path / ".git").exists() and not (repo_path / "HEAD").exists():
        raise RepoError(f"{repo_path} is not a git repository")
    repo_id = repo_path.name
    raw = _git(repo_path, "log", "--first-parent", "--no-merges", "--reverse",
               "--format=%x1e%H%x1f%ct%x1f%B")
    results: list[tuple[tuple, MethodPairTriplet]] = []
    for record in raw.split("\x1e"):
        if not record.strip():
            continue
        commit, epoch, message = record.split("\x1f", 2)
        commit_time = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if since is not None and commit_time < since:
            continue
        if until is not None and commit_time > until:
            continue
        message = message.rstrip("\n")
        # Root commits produce no diff lines (every file is an addition).
        status = _git(repo_path, "diff-tree", "-r", "-M", "--no-commit-id",
                      "--name-status", commit)
        for line in status.splitlines():
            versions = _parse_file_versions(line)
            if versions is None:
                continue
            old_path, new_path = versions
            before_src = _git(repo_path, "show", f"{commit}^:{old_path}")
            after_src = _git(repo_path, "show", f"{commit}:{new_path}")
            for pair in _file_pairs(repo_path, before_src, after_src, commit, new_path):
                triplet = MethodPairTriplet(
                    repo_id=repo_id,
                    commit_hash=commit,
                    commit_time=commit_time,
                    message=message,
                    prior=pair.prior,
                    updated=pair.updated,
                    file_path=new_path,
                )
                results.append(((commit_time, new_path, pair.name), triplet))
    results.sort(key=lambda item: item[0])
    return [t for _, t in results]


def mine_repos(
    repo_paths: Sequence[str | Path],
    since: datetime | None = None,
    until: datetime | None = None,
    jobs: int = 1,
) -> list[MethodPairTriplet]:
    """Mine several repositories concurrently, then globally sort."""
    if jobs <= 1 or len(repo_paths) <= 1:
        batches = [mine_repo(p, since, until) for p in repo_paths]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(lambda p: mine_repo(p, since, until), repo_paths))
    merged = [t for batch in batches for t in batch]
    merged.sort(key=lambda t: (t.commit_time, t.repo_id, t.commit_hash, t.file_path))
    return merged
