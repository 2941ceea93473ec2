"""Guttman R-tree with quadratic split, supporting insert and delete.

Node capacity M=16, minimum fill m=6. Deletion condenses underfull nodes
and reinserts their leaf entries. A structural validator walks the whole
tree and is used by the test suite after every mutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geomodel import BBox, bbox_intersects

MAX_ENTRIES = 16
MIN_ENTRIES = 6


@dataclass
class _Entry:
    bbox: BBox
    child: "_Node | None" = None  # internal entries
    payload: object = None  # leaf entries


@dataclass
class _Node:
    leaf: bool
    entries: list[_Entry] = field(default_factory=list)
    parent: "_Node | None" = None

    def mbr(self) -> BBox:
        box = self.entries[0].bbox
        for entry in self.entries[1:]:
            box = box.union(entry.bbox)
        return box


def _area(box: BBox) -> float:
    return (box.east - box.west) * (box.north - box.south)


def _enlargement(box: BBox, extra: BBox) -> float:
    return _area(box.union(extra)) - _area(box)


class RTree:
    """Spatial index mapping bounding boxes to payloads."""

    def __init__(self):
        self._root = _Node(leaf=True)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    # -- insertion -----------------------------------------------------------

    def insert(self, bbox: BBox, payload) -> None:
        leaf = self._choose_leaf(self._root, bbox)
        leaf.entries.append(_Entry(bbox=bbox, payload=payload))
        self._count += 1
        if len(leaf.entries) > MAX_ENTRIES:
            self._split_and_adjust(leaf)

    def _choose_leaf(self, node: _Node, bbox: BBox) -> _Node:
        while not node.leaf:
            best = None
            best_key = None
            for entry in node.entries:
                key = (_enlargement(entry.bbox, bbox), _area(entry.bbox))
                if best_key is None or key < best_key:
                    best, best_key = entry, key
            best.bbox = best.bbox.union(bbox)
            node = best.child
        return node

    def _split_and_adjust(self, node: _Node) -> None:
        while len(node.entries) > MAX_ENTRIES:
            sibling = self._quadratic_split(node)
            parent = node.parent
            if parent is None:
                new_root = _Node(leaf=False)
                new_root.entries.append(_Entry(bbox=node.mbr(), child=node))
                new_root.entries.append(_Entry(bbox=sibling.mbr(), child=sibling))
                node.parent = sibling.parent = new_root
                self._root = new_root
                return
            self._entry_for(parent, node).bbox = node.mbr()
            parent.entries.append(_Entry(bbox=sibling.mbr(), child=sibling))
            sibling.parent = parent
            node = parent
        self._refresh_upward(node)

    def _entry_for(self, parent: _Node, child: _Node) -> _Entry:
        for entry in parent.entries:
            if entry.child is child:
                return entry
        raise AssertionError("child not registered in parent")

    def _refresh_upward(self, node: _Node) -> None:
        while node.parent is not None:
            self._entry_for(node.parent, node).bbox = node.mbr()
            node = node.parent

    def _quadratic_split(self, node: _Node) -> _Node:
        entries = node.entries
        # pick the pair wasting the most area together
        worst = None
        seeds = (0, 1)
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                waste = (
                    _area(entries[i].bbox.union(entries[j].bbox))
                    - _area(entries[i].bbox)
                    - _area(entries[j].bbox)
                )
                if worst is None or waste > worst:
                    worst, seeds = waste, (i, j)
        group_a = [entries[seeds[0]]]
        group_b = [entries[seeds[1]]]
        rest = [e for k, e in enumerate(entries) if k not in seeds]

        while rest:
            # min-fill guarantee: hand everything to a starving group
            if len(group_a) + len(rest) == MIN_ENTRIES:
                group_a.extend(rest)
                break
            if len(group_b) + len(rest) == MIN_ENTRIES:
                group_b.extend(rest)
                break
            box_a = group_a[0].bbox
            for e in group_a[1:]:
                box_a = box_a.union(e.bbox)
            box_b = group_b[0].bbox
            for e in group_b[1:]:
                box_b = box_b.union(e.bbox)
            # next entry: strongest preference for one group
            best_idx = 0
            best_diff = -1.0
            for k, e in enumerate(rest):
                d_a = _enlargement(box_a, e.bbox)
                d_b = _enlargement(box_b, e.bbox)
                diff = abs(d_a - d_b)
                if diff > best_diff:
                    best_diff, best_idx = diff, k
            entry = rest.pop(best_idx)
            d_a = _enlargement(box_a, entry.bbox)
            d_b = _enlargement(box_b, entry.bbox)
            if d_a < d_b:
                group_a.append(entry)
            elif d_b < d_a:
                group_b.append(entry)
            elif _area(box_a) != _area(box_b):
                (group_a if _area(box_a) < _area(box_b) else group_b).append(entry)
            else:
                (group_a if len(group_a) <= len(group_b) else group_b).append(entry)

        node.entries = group_a
        sibling = _Node(leaf=node.leaf, entries=group_b)
        if not sibling.leaf:
            for entry in sibling.entries:
                entry.child.parent = sibling
        return sibling

    # -- deletion ------------------------------------------------------------

    def delete(self, bbox: BBox, payload) -> bool:
        """Remove one entry matching (bbox, payload); False if absent."""
        found = self._find_leaf(self._root, bbox, payload)
        if found is None:
            return False
        leaf, entry = found
        leaf.entries.remove(entry)
        self._count -= 1
        self._condense(leaf)
        return True

    def _find_leaf(self, node: _Node, bbox: BBox, payload):
        if node.leaf:
            for entry in node.entries:
                if entry.payload == payload and entry.bbox == bbox:
                    return node, entry
            return None
        for entry in node.entries:
            if bbox_intersects(entry.bbox, bbox):
                found = self._find_leaf(entry.child, bbox, payload)
                if found is not None:
                    return found
        return None

    def _condense(self, node: _Node) -> None:
        orphans: list[_Entry] = []
        while node.parent is not None:
            parent = node.parent
            if len(node.entries) < MIN_ENTRIES:
                parent.entries.remove(self._entry_for(parent, node))
                orphans.extend(self._leaf_entries(node))
            else:
                self._entry_for(parent, node).bbox = node.mbr()
            node = parent
        # shrink a root that lost its fanout
        while not self._root.leaf and len(self._root.entries) == 1:
            self._root = self._root.entries[0].child
            self._root.parent = None
        if not self._root.leaf and not self._root.entries:
            self._root = _Node(leaf=True)
        for entry in orphans:
            self._count -= 1
            self.insert(entry.bbox, entry.payload)

    def _leaf_entries(self, node: _Node) -> list[_Entry]:
        if node.leaf:
            return list(node.entries)
        out = []
        for entry in node.entries:
            out.extend(self._leaf_entries(entry.child))
        return out

    # -- queries -------------------------------------------------------------

    def search(self, bbox: BBox) -> list:
        """Payloads of all entries whose box intersects ``bbox``."""
        results = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            for entry in node.entries:
                if bbox_intersects(entry.bbox, bbox):
                    if node.leaf:
                        results.append(entry.payload)
                    else:
                        stack.append(entry.child)
        return results

    def all_payloads(self) -> list:
        return [e.payload for e in self._leaf_entries(self._root)]

    # -- structural validation ------------------------------------------------

    def validate(self) -> None:
        """Raise AssertionError on any structural violation."""
        leaf_total = self._check_node(self._root, is_root=True)
        assert leaf_total == self._count, f"leaf count {leaf_total} != size {self._count}"
        depths = self._leaf_depths(self._root, 0)
        assert len(set(depths)) <= 1, f"unbalanced leaf depths: {sorted(set(depths))}"

    def _check_node(self, node: _Node, is_root: bool) -> int:
        if is_root:
            assert node.parent is None
            if not node.leaf:
                assert len(node.entries) >= 2, "internal root needs >= 2 entries"
        else:
            assert MIN_ENTRIES <= len(node.entries), "underfull node"
        assert len(node.entries) <= MAX_ENTRIES, "overfull node"
        if node.leaf:
            return len(node.entries)
        total = 0
        for entry in node.entries:
            child = entry.child
            assert child is not None and child.parent is node, "broken parent link"
            assert entry.bbox == child.mbr(), "stale MBR"
            child_box = child.mbr()
            assert (
                entry.bbox.west <= child_box.west
                and entry.bbox.south <= child_box.south
                and entry.bbox.east >= child_box.east
                and entry.bbox.north >= child_box.north
            ), "child MBR escapes parent"
            total += self._check_node(child, is_root=False)
        return total

    def _leaf_depths(self, node: _Node, depth: int) -> list[int]:
        if node.leaf:
            return [depth]
        out = []
        for entry in node.entries:
            out.extend(self._leaf_depths(entry.child, depth + 1))
        return out
