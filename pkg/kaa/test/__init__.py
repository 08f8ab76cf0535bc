import os
import unittest

# no log files from the test run; set before kaa configures its logger
os.environ.setdefault('LOG_DIR', '')
os.environ.setdefault('KAA_THREADS', '2')

import numpy as np  # noqa: E402

from kaa.config import settings  # noqa: E402
from kaa.models.params import Params  # noqa: E402


class BaseTestCase(unittest.TestCase):

    # worked example: q=2, x=(1,0,0), v=(0,1,0) sits at periapsis
    Q_EXAMPLE = 2.0
    X_EXAMPLE = (1.0, 0.0, 0.0)
    V_EXAMPLE = (0.0, 1.0, 0.0)

    def setUp(self):
        self._saved_settings = settings.to_dict()
        self.rng = np.random.default_rng(1234)
        self.params = Params(q=self.Q_EXAMPLE)
        self.x = np.array(self.X_EXAMPLE)
        self.v = np.array(self.V_EXAMPLE)

    def tearDown(self):
        settings.update(**self._saved_settings)

    def assertAllClose(self, actual, desired, rtol=1e-12, atol=0.0, msg=''):
        np.testing.assert_allclose(actual, desired, rtol=rtol, atol=atol, err_msg=msg)

    def random_states(self, n, a_range=(0.3, 3.0), r_range=(0.5, 10.0)):
        """Random physical states with |x| and |v| spread over the given ranges"""
        x = self.rng.standard_normal((n, 3))
        x *= (self.rng.uniform(*r_range, n) / np.linalg.norm(x, axis=1))[:, None]
        v = self.rng.standard_normal((n, 3))
        v *= (self.rng.uniform(*a_range, n) / np.linalg.norm(v, axis=1))[:, None]
        return x, v
