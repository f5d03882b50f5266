"""Twenty hand-computed metric scenarios shared with the acceptance suite.

Recall cases: (name, rankings, targets, k, expected).
AC cases: (name, rankings, constraint_specs, k, expected) where each
constraint spec is (query_id, positive_pairs, negative_pairs).
ILD cases: (name, rankings, k, expected); items come from METRIC_GALLERY.

Every expected value is written out as the arithmetic that produced it,
not as an opaque constant.
"""

from __future__ import annotations

from attrieve import BenchmarkQuery, GalleryItem, VisualDictionary


def _item(item_id: str, pairs: list[tuple[str, str]]) -> GalleryItem:
    return GalleryItem(id=item_id, dictionary=VisualDictionary.from_pairs(pairs))


METRIC_GALLERY = {
    item.id: item
    for item in [
        _item("m0", [("color", "red"), ("pattern", "solid")]),
        _item("m1", [("color", "red"), ("pattern", "striped")]),
        _item("m2", [("color", "blue"), ("pattern", "solid")]),
        _item("m3", [("color", "blue"), ("pattern", "striped")]),
        _item("m4", [("color", "red")]),
        _item("m5", [("pattern", "solid")]),
        # pair-set shapes for the diversity scenarios
        _item("x1", [("attr", "a"), ("attr", "b")]),
        _item("x2", [("attr", "a"), ("attr", "c")]),
        _item("x3", [("attr", "d")]),
        _item("dup1", [("color", "red")]),
        _item("dup2", [("color", "red")]),
        _item("solo1", [("color", "red")]),
        _item("solo2", [("fabric", "silk")]),
        _item("bare1", []),
        _item("bare2", []),
    ]
}

_FOUR_RANKS = {  # targets sit at ranks 1, 3, 12, 60
    "q1": ["t1"] + [f"f{i:03d}" for i in range(70)],
    "q2": ["f200", "f201", "t2"] + [f"f{i:03d}" for i in range(70)],
    "q3": [f"f{i:03d}" for i in range(11)] + ["t3"] + [f"g{i:03d}" for i in range(60)],
    "q4": [f"f{i:03d}" for i in range(59)] + ["t4"] + [f"g{i:03d}" for i in range(20)],
}
_FOUR_TARGETS = {"q1": "t1", "q2": "t2", "q3": "t3", "q4": "t4"}

RECALL_CASES = [
    ("hit_at_rank_one", {"q": ["t", "x"]}, {"q": "t"}, 1, 1.0),
    ("miss_at_rank_two", {"q": ["x", "t"]}, {"q": "t"}, 1, 0.0),
    ("four_ranks_at_10", _FOUR_RANKS, _FOUR_TARGETS, 10, 2 / 4),
    ("four_ranks_at_50", _FOUR_RANKS, _FOUR_TARGETS, 50, 3 / 4),
    ("four_ranks_at_1", _FOUR_RANKS, _FOUR_TARGETS, 1, 1 / 4),
    ("four_ranks_at_60", _FOUR_RANKS, _FOUR_TARGETS, 60, 4 / 4),
    ("target_absent", {"q": ["a", "b", "c"]}, {"q": "t"}, 10, 0.0),
    ("one_hit_one_miss", {"q1": ["t1"], "q2": ["x"]}, {"q1": "t1", "q2": "t2"}, 5, 1 / 2),
]

AC_CASES = [
    ("half_satisfy_at_4",
     {"q": ["m0", "m1", "m2", "m3"]},
     [("q", [("color", "red")], [])], 4, 2 / 4),
    ("prefix_all_satisfy_at_2",
     {"q": ["m0", "m1", "m2", "m3"]},
     [("q", [("color", "red")], [])], 2, 2 / 2),
    ("negative_disqualifies",
     {"q": ["m0", "m1", "m4", "m2"]},
     [("q", [("color", "red")], [("pattern", "striped")])], 4, 2 / 4),
    ("short_list_denominator",
     {"q": ["m0", "m1"]},
     [("q", [("color", "red")], [("pattern", "striped")])], 10, 1 / 2),
    ("mean_over_queries",
     {"qa": ["m0", "m1"], "qb": ["m0", "m1"]},
     [("qa", [("color", "red")], []), ("qb", [("color", "blue")], [])], 2,
     (2 / 2 + 0 / 2) / 2),
    ("two_positives_required",
     {"q": ["m0", "m1", "m5", "m4"]},
     [("q", [("color", "red"), ("pattern", "solid")], [])], 4, 1 / 4),
]

ILD_CASES = [
    # pair sets {a,b}, {a,c}, {d}: distances 2/3, 1, 1
    ("worked_three_item_example", {"q": ["x1", "x2", "x3"]}, 3,
     (1.0 - 1.0 / 3.0 + 1.0 + 1.0) / 3.0),
    ("identical_items", {"q": ["dup1", "dup2"]}, 2, 0.0),
    ("disjoint_items", {"q": ["solo1", "solo2"]}, 2, 1.0),
    ("single_item_list", {"q": ["m0"]}, 5, 0.0),
    ("both_empty_pair", {"q": ["bare1", "bare2"]}, 2, 0.0),
    ("empty_versus_nonempty", {"q": ["bare1", "solo1"]}, 2, 1.0),
]


def build_ac_queries(specs) -> list[BenchmarkQuery]:
    queries = []
    for query_id, pos_pairs, neg_pairs in specs:
        queries.append(
            BenchmarkQuery(
                query_id=query_id,
                reference=VisualDictionary(),
                edit="+placeholder:edit",
                target_id="m0",
                positive_constraints=VisualDictionary.from_pairs(pos_pairs).entries,
                negative_constraints=VisualDictionary.from_pairs(neg_pairs).entries,
            )
        )
    return queries
