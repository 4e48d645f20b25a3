
from django.core.management.base import BaseCommand, CommandError


USAGE_ERROR = 1
RUNTIME_FAILURE = 2


class CascadeCommand(BaseCommand):
    """Exit 1 on bad arguments or config, 2 when the work itself fails"""

    _executing = False

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except SystemExit as exc:
            # argparse exits with 2 on bad arguments, before execute() runs
            if exc.code == 2 and not self._executing:
                raise SystemExit(USAGE_ERROR)
            raise

    def execute(self, *args, **options):
        self._executing = True
        return super().execute(*args, **options)

    @staticmethod
    def usage_error(message) -> CommandError:
        return CommandError(str(message), returncode=USAGE_ERROR)

    @staticmethod
    def failure(exc: Exception) -> CommandError:
        return CommandError(str(exc), returncode=RUNTIME_FAILURE)

    @staticmethod
    def parse_list(value: str):
        return [item.strip() for item in value.split(',') if item.strip()]
