from django.conf import settings
from django.test import SimpleTestCase, override_settings

from communities.conf import DEFAULTS, get_setting


class GetSettingTests(SimpleTestCase):
    def test_project_settings_only_override_known_keys(self):
        self.assertLessEqual(set(settings.CASCADE_COMMUNITIES), set(DEFAULTS))

    def test_packaged_default(self):
        with override_settings(CASCADE_COMMUNITIES={}):
            self.assertEqual(get_setting('CALIBRATION_BATCH_SIZE'), DEFAULTS['CALIBRATION_BATCH_SIZE'])

    @override_settings(CASCADE_COMMUNITIES={'BENCH_WORKERS': 3})
    def test_override_wins(self):
        self.assertEqual(get_setting('BENCH_WORKERS'), 3)
        self.assertEqual(get_setting('LFR_MAX_RETRIES'), DEFAULTS['LFR_MAX_RETRIES'])

    def test_unknown_name(self):
        with self.assertRaises(KeyError):
            get_setting('NO_SUCH_SETTING')
