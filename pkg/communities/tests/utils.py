import shutil
import tempfile
from pathlib import Path


class TempDirMixin:
    """A scratch directory per test, removed afterwards"""

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp(prefix='communities-'))
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def write(self, name: str, text: str) -> Path:
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return path
