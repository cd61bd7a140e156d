"""Normalized record types and the dump field mapping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

# Dump artifacts standing in for removed content; records whose full text is
# one of these carry no signal and are dropped before the word-count filter.
DELETED_MARKERS = frozenset({"[deleted]", "[removed]"})


@dataclass(frozen=True)
class RawRecord:
    """One post or comment as it came off the dump, already normalized to
    common field names.  Post text is title and body joined by one space."""

    kind: str  # "post" | "comment"
    id: str
    community: str
    author: str
    text: str
    upvotes: int
    created_utc: int
    nsfw_flag: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("post", "comment"):
            raise ValueError(f"kind must be post or comment, got {self.kind!r}")
        if not self.id:
            raise ValueError("record id must be non-empty")


@dataclass(frozen=True)
class ContentItem:
    """A RawRecord that survived content filtering, plus derived fields."""

    kind: str
    id: str
    community: str
    author: str
    text: str
    upvotes: int
    created_utc: int
    nsfw_flag: bool
    word_count: int
    language: str = ""

    @classmethod
    def from_raw(cls, rec: RawRecord, word_count: int, language: str = "") -> "ContentItem":
        return cls(
            kind=rec.kind,
            id=rec.id,
            community=rec.community,
            author=rec.author,
            text=rec.text,
            upvotes=rec.upvotes,
            created_utc=rec.created_utc,
            nsfw_flag=rec.nsfw_flag,
            word_count=word_count,
            language=language,
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "id": self.id,
            "community": self.community,
            "author": self.author,
            "text": self.text,
            "upvotes": self.upvotes,
            "created_utc": self.created_utc,
            "nsfw_flag": self.nsfw_flag,
            "word_count": self.word_count,
            "language": self.language,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ContentItem":
        return cls(
            kind=d["kind"],
            id=d["id"],
            community=d["community"],
            author=d["author"],
            text=d["text"],
            upvotes=int(d["upvotes"]),
            created_utc=int(d["created_utc"]),
            nsfw_flag=bool(d["nsfw_flag"]),
            word_count=int(d["word_count"]),
            language=d.get("language", ""),
        )


@dataclass(frozen=True)
class CommunityMeta:
    community: str
    subscriber_count: int
    nsfw_flag: bool
    public_description: str = ""

    def __post_init__(self) -> None:
        if self.subscriber_count < 0:
            raise ValueError("subscriber_count must be >= 0")


@dataclass(frozen=True)
class DumpFieldMap:
    """Mapping from dump JSON keys to normalized fields.

    Defaults follow the Pushshift convention: posts carry `title` plus
    `selftext`, comments carry `body`; a line is a post iff the post title
    field is present.
    """

    post_title: str = "title"
    post_body: str = "selftext"
    comment_body: str = "body"
    score: str = "score"
    community: str = "subreddit"
    author: str = "author"
    created: str = "created_utc"
    nsfw: str = "over_18"
    id: str = "id"

    def normalize(self, obj: Mapping[str, Any]) -> RawRecord:
        """Build a RawRecord from one parsed dump line.

        Raises KeyError/ValueError/TypeError for lines missing required
        fields or carrying non-coercible values; callers count those as
        malformed.
        """
        community = str(obj[self.community])
        author = str(obj.get(self.author, ""))
        upvotes = int(obj[self.score])
        created = int(obj[self.created])
        rec_id = str(obj[self.id])
        if not rec_id:
            raise ValueError("empty record id")
        if self.post_title in obj:
            title = str(obj[self.post_title])
            body = str(obj.get(self.post_body, ""))
            text = " ".join(part for part in (title.strip(), body.strip()) if part)
            return RawRecord(
                kind="post",
                id=rec_id,
                community=community,
                author=author,
                text=text,
                upvotes=upvotes,
                created_utc=created,
                nsfw_flag=bool(obj.get(self.nsfw, False)),
            )
        body = str(obj[self.comment_body]).strip()
        return RawRecord(
            kind="comment",
            id=rec_id,
            community=community,
            author=author,
            text=body,
            upvotes=upvotes,
            created_utc=created,
            nsfw_flag=False,
        )


def count_words(text: str) -> int:
    """Whitespace-separated token count on the raw text, no punctuation
    stripping."""
    return len(text.split())
