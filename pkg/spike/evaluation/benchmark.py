"""Per-frame inference latency, tokenization included, disk I/O excluded"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from spike.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class BenchmarkReport:
    samples_ms: list = field(default_factory=list)

    def __repr__(self):
        return f'<BenchmarkReport n={len(self.samples_ms)} median_ms={self.median_ms:.3f}>'

    @property
    def median_ms(self):
        return float(np.median(self.samples_ms))

    @property
    def p95_ms(self):
        return float(np.percentile(self.samples_ms, 95))

    def to_line(self):
        return f'median_ms={self.median_ms:.4f} p95_ms={self.p95_ms:.4f}'


def benchmark_inference(model, sequences, warmup=5, iters=50, seed=0, clock=time.perf_counter):
    """
    Time `iters` single-frame forwards over `sequences` (cycled), after
    `warmup` untimed ones. Sequences must already be loaded and centred.
    """
    if iters < 1:
        raise ConfigError('iters', f'must be at least 1, got {iters}')
    if warmup < 0:
        raise ConfigError('warmup', f'must be non-negative, got {warmup}')
    sequences = list(sequences)
    if not sequences:
        raise ConfigError('iters', 'no sequences to benchmark')

    for i in range(warmup):
        model.forward(sequences[i % len(sequences)], seed)

    samples = []
    for i in range(iters):
        seq = sequences[i % len(sequences)]
        started = clock()
        model.forward(seq, seed)
        samples.append((clock() - started) * 1000.0)

    report = BenchmarkReport(samples)
    logger.info('Benchmark over %d iterations: %s', iters, report.to_line())
    return report
