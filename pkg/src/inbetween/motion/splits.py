from dataclasses import dataclass

import numpy as np

from ..errors import SplitError

# fractions of the style catalog: A, B (together the style-overlapping part), C
SUBSET_FRACTIONS = (0.46, 0.44, 0.10)
OVERLAP_TEST_FRACTION = 0.10


@dataclass
class DatasetSplit:
    styles_a: list
    styles_b: list
    styles_c: list
    train: list
    test_overlap: list
    test_no_overlap: list

    def subset_styles(self, name):
        return {"A": self.styles_a, "B": self.styles_b, "C": self.styles_c}[name]

    def clips_of(self, clip_styles, indices, subset):
        allowed = set(self.subset_styles(subset))
        return [i for i in indices if clip_styles[i] in allowed]


def subset_sizes(n_styles):
    n_c = int(round(SUBSET_FRACTIONS[2] * n_styles))
    n_a = int(round(SUBSET_FRACTIONS[0] * n_styles))
    n_b = n_styles - n_a - n_c
    if min(n_a, n_b, n_c) < 1:
        raise SplitError(f"{n_styles} styles cannot fill subsets A/B/C")
    return n_a, n_b, n_c


def make_splits(styles, clip_styles, seed=0):
    """Split clips by style catalog order.

    The last 10% of styles (C) form the style-no-overlap test set; from each
    remaining style 10% of its clips (at least one) go to the
    style-overlap test set; everything else is training data.
    """
    styles = list(styles)
    n_a, n_b, _ = subset_sizes(len(styles))
    A, B, C = styles[:n_a], styles[n_a:n_a + n_b], styles[n_a + n_b:]
    rng = np.random.default_rng(seed)
    train, test_overlap, test_no = [], [], []
    c_set = set(C)
    for s in styles:
        idx = [i for i, cs in enumerate(clip_styles) if cs == s]
        if s in c_set:
            test_no.extend(idx)
            continue
        if not idx:
            continue
        n_test = max(1, int(round(OVERLAP_TEST_FRACTION * len(idx))))
        if n_test >= len(idx):
            raise SplitError(f"style {s!r} has too few clips ({len(idx)}) to hold some out")
        chosen = set(rng.choice(idx, size=n_test, replace=False).tolist())
        test_overlap.extend(i for i in idx if i in chosen)
        train.extend(i for i in idx if i not in chosen)
    return DatasetSplit(A, B, C, sorted(train), sorted(test_overlap), sorted(test_no))
