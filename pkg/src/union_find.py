# union_find.py
from collections import defaultdict
from typing import Dict, Generic, Hashable, List, Tuple, TypeVar

from report import sort_key

T = TypeVar("T", bound=Hashable)


class DisjointSet(Generic[T]):
    """Union-find with path compression and union by rank."""

    def __init__(self):
        self.parent: Dict[T, T] = {}
        self.rank: Dict[T, int] = {}

    def make_set(self, e: T) -> None:
        if e in self.parent:
            return
        self.parent[e] = e
        self.rank[e] = 0

    def find(self, e: T) -> T:
        self.make_set(e)
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        # compress
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, x: T, y: T) -> bool:
        """Merge the classes of x and y; returns False if they were already merged."""
        x_root = self.find(x)
        y_root = self.find(y)
        if x_root == y_root:
            return False
        if self.rank[x_root] < self.rank[y_root]:
            x_root, y_root = y_root, x_root
        self.parent[y_root] = x_root
        if self.rank[x_root] == self.rank[y_root]:
            self.rank[x_root] += 1
        return True

    def same(self, x: T, y: T) -> bool:
        return self.find(x) == self.find(y)

    def classes(self) -> Tuple[Tuple[T, ...], ...]:
        """Classes as sorted tuples, ordered by their least member."""
        groups: Dict[T, List[T]] = defaultdict(list)
        for e in self.parent:
            groups[self.find(e)].append(e)
        sorted_groups = [tuple(sorted(g, key=sort_key)) for g in groups.values()]
        return tuple(sorted(sorted_groups, key=lambda g: sort_key(g[0])))

    def canonical(self, e: T) -> T:
        """Least member of the class of e."""
        root = self.find(e)
        return min((x for x in self.parent if self.find(x) == root), key=sort_key)
