"""Recordings of labelled point-cloud frames and the subject-wise split"""

from dataclasses import dataclass, field

import numpy as np

from spike.errors import DataError
from spike.models.skeleton import SkeletonFrame

# Subjects 00-04 are held out for testing on ITOP
ITOP_TEST_SUBJECTS = frozenset(f'{i:02d}' for i in range(5))


def make_frame_id(subject, index):
    return f'{subject}_{index:05d}'


@dataclass
class Frame:
    """One labelled point cloud"""

    frame_id: str
    points: np.ndarray
    skeleton: SkeletonFrame

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)

    def __repr__(self):
        return f'<Frame {self.frame_id} points={len(self.points)}>'


@dataclass
class Recording:
    """Temporally ordered frames of a single subject"""

    subject: str
    recording: str
    frames: list = field(default_factory=list)

    def __len__(self):
        return len(self.frames)

    def __repr__(self):
        return f'<Recording subject={self.subject} recording={self.recording} frames={len(self)}>'

    @property
    def key(self):
        return f'{self.subject}-{self.recording}'


class SequenceDataset:
    """Ordered recordings with a subject → split mapping"""

    def __init__(self, recordings, test_subjects=ITOP_TEST_SUBJECTS):
        self.recordings = list(recordings)
        self.test_subjects = frozenset(test_subjects)
        self._index = [(r, t) for r, rec in enumerate(self.recordings)
                       for t in range(len(rec))]

    def __len__(self):
        return len(self._index)

    def __repr__(self):
        return f'<SequenceDataset recordings={len(self.recordings)} frames={len(self)}>'

    def __eq__(self, other):
        if not isinstance(other, SequenceDataset) or len(self.recordings) != len(other.recordings):
            return False
        for a, b in zip(self.recordings, other.recordings):
            if (a.subject, a.recording, len(a)) != (b.subject, b.recording, len(b)):
                return False
            for fa, fb in zip(a.frames, b.frames):
                if (fa.frame_id != fb.frame_id
                        or not np.array_equal(fa.points, fb.points)
                        or not np.array_equal(fa.skeleton.joints, fb.skeleton.joints)
                        or not np.array_equal(fa.skeleton.valid, fb.skeleton.valid)):
                    return False
        return True

    @property
    def subjects(self):
        return sorted({rec.subject for rec in self.recordings})

    def split_of(self, subject):
        """'test' for held-out subjects, otherwise 'train'"""
        return 'test' if subject in self.test_subjects else 'train'

    def locate(self, index):
        """Global frame index → (recording position, frame position)"""
        if not 0 <= index < len(self._index):
            raise DataError(f'frame index {index} out of range (0..{len(self._index) - 1})')
        return self._index[index]

    def frame(self, index):
        r, t = self.locate(index)
        return self.recordings[r].frames[t]

    def subset(self, split=None, subjects=None):
        """Recordings of one split and/or an explicit subject set"""
        chosen = []
        for rec in self.recordings:
            if split is not None and split != 'all' and self.split_of(rec.subject) != split:
                continue
            if subjects is not None and rec.subject not in subjects:
                continue
            chosen.append(rec)
        return SequenceDataset(chosen, self.test_subjects)

    def eval_indices(self):
        """Global indices whose target frame carries at least one valid joint"""
        return [i for i, (r, t) in enumerate(self._index)
                if self.recordings[r].frames[t].skeleton.has_valid]
