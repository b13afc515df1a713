import numpy as np
import pytest

from linedensity import AnnotationSet, KernelConfig, LineLabel, Point2


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[{'PASS' if report.passed else 'FAIL'}] {name}")


@pytest.fixture
def fig3_config() -> KernelConfig:
    """Hyperparameters of the worked single-segment example."""
    return KernelConfig(sigma_basic=3.0, expand_factor=0.2, aspect_ratio=4.0,
                        fwhm_const=2.355, alpha=4.0, trunc_mult=3.0)


@pytest.fixture
def fig3_line() -> LineLabel:
    return LineLabel(Point2(5.0, 5.0), Point2(25.0, 25.0))


@pytest.fixture
def fig3_annotation(fig3_line) -> AnnotationSet:
    return AnnotationSet("fig3", 30, 30, (fig3_line,))


def random_annotation(rng: np.random.Generator, width: int, height: int,
                      n_labels: int, max_length: float = 120.0) -> AnnotationSet:
    """Random labels with arbitrary float coordinates, incl. near-degenerate."""
    labels = []
    for _ in range(n_labels):
        ax = rng.uniform(0, width - 1)
        ay = rng.uniform(0, height - 1)
        angle = rng.uniform(0, 2 * np.pi)
        length = rng.uniform(0.0, max_length)
        bx = float(np.clip(ax + length * np.cos(angle), 0, width - 1))
        by = float(np.clip(ay + length * np.sin(angle), 0, height - 1))
        labels.append(LineLabel(Point2(ax, ay), Point2(bx, by)))
    return AnnotationSet("random", width, height, tuple(labels))
