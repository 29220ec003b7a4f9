import pytest

from sommertile import PermutationVector, build, default_window


def swap_top_perm(d: int) -> PermutationVector:
    """Identity at every level except the top, where colors 0 and 1 swap."""
    perms = [tuple(range(i)) for i in range(2, d)]
    perms.append((1, 0) + tuple(range(2, d)))
    return PermutationVector(d, tuple(perms))


class MeshCache:
    """Builds default-window meshes once per session."""

    def __init__(self):
        self._store = {}

    def get(self, d: int, nonidentity: bool = False):
        key = (d, nonidentity)
        if key not in self._store:
            pi = swap_top_perm(d) if nonidentity else None
            self._store[key] = build(d, pi, default_window(d))
        return self._store[key]


@pytest.fixture(scope="session")
def meshes():
    return MeshCache()
