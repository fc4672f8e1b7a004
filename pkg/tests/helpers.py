"""Shared corpus builders and brute-force oracles for the test suite."""

from __future__ import annotations

from itertools import combinations

from cleval import Region, WordInstance, make_region
from cleval.dataio import Corpus, ImageAnnotations

UPPER = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def rect(x0: float, y0: float, x1: float, y1: float) -> Region:
    return make_region([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], "quad")


def instance(region: Region, text: str | None, image_id: str = "img_1",
             dont_care: bool = False, line: int = 1) -> WordInstance:
    return WordInstance(region=region, text=text, dont_care=dont_care,
                        image_id=image_id, source_line=line)


def box_word(x0: float, y0: float, x1: float, y1: float, text: str | None,
             image_id: str = "img_1", dont_care: bool = False,
             line: int = 1) -> WordInstance:
    return instance(rect(x0, y0, x1, y1), text, image_id, dont_care, line)


def distinct_word(index: int, length: int = 10) -> str:
    """Word of `length` pairwise-distinct uppercase letters."""
    assert length <= len(UPPER)
    return "".join(UPPER[(index + j) % len(UPPER)] for j in range(length))


def grid_corpus(num_images: int = 10, words_per_image: int = 20,
                word_len: int = 10, width: float = 100.0,
                height: float = 20.0, gap: float = 10.0) -> Corpus:
    """Non-overlapping stacked word boxes with distinct-letter words."""
    images = {}
    index = 0
    for im in range(num_images):
        image_id = f"img_{im:04d}"
        gts = []
        for w in range(words_per_image):
            y = w * (height + gap)
            gts.append(box_word(0.0, y, width, y + height,
                                distinct_word(index, word_len),
                                image_id=image_id, line=w + 1))
            index += 1
        images[image_id] = ImageAnnotations(gts=gts)
    return Corpus(images=images)


def with_dets(corpus: Corpus, det_map: dict[str, list[WordInstance]]) -> Corpus:
    images = {
        image_id: ImageAnnotations(gts=ann.gts, dets=det_map.get(image_id, []))
        for image_id, ann in corpus.images.items()
    }
    return Corpus(images=images)


def self_det_corpus(corpus: Corpus) -> Corpus:
    """Copy every ground truth (don't-cares included) to the detection side."""
    images = {
        image_id: ImageAnnotations(gts=ann.gts, dets=list(ann.gts))
        for image_id, ann in corpus.images.items()
    }
    return Corpus(images=images)


def brute_force_lcs_len(a: str, b: str) -> int:
    """Longest common subsequence length by exhaustive enumeration."""
    if len(a) > len(b):
        a, b = b, a
    subsequences = {""}
    for r in range(1, len(a) + 1):
        for combo in combinations(range(len(a)), r):
            subsequences.add("".join(a[i] for i in combo))

    def is_subsequence(needle: str, haystack: str) -> bool:
        it = iter(haystack)
        return all(ch in it for ch in needle)

    return max(len(s) for s in subsequences if is_subsequence(s, b))
