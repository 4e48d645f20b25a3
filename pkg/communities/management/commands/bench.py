from communities.exceptions import CascadeCommunitiesError, ParseError
from communities.serializers import ExperimentSpecSerializer
from communities.services import FAILED, ExperimentRunner, load_experiment_config

from ._base import CascadeCommand


class Command(CascadeCommand):
    help = 'Run a (dataset x algorithm x budget x seed) benchmark grid from a config file'

    def add_arguments(self, parser):
        parser.add_argument('config', type=str, help='YAML or key=value experiment config')
        parser.add_argument('--output', type=str, help='Override the output directory')
        parser.add_argument('--workers', type=int, help='Override the worker count')
        parser.add_argument('--plots', action='store_true', help='Also render SVG charts')

    def handle(self, *args, **options):
        try:
            data = load_experiment_config(options['config'])
        except (OSError, ParseError) as exc:
            raise self.usage_error(f"cannot read {options['config']}: {exc}")
        for key in ('output', 'workers'):
            if options[key] is not None:
                data[key] = options[key]
        if options['plots']:
            data['plots'] = True

        serializer = ExperimentSpecSerializer(data=data)
        if not serializer.is_valid():
            raise self.usage_error(f"invalid config: {serializer.errors}")
        spec = serializer.save()

        self.stdout.write(
            f"Running {len(spec.datasets)} datasets x {len(spec.algorithms)} algorithms x "
            f"{len(spec.budgets)} budgets x {len(spec.seeds)} seeds into {spec.output}"
        )
        runner = ExperimentRunner(spec, progress=self.stdout.write)
        try:
            report = runner.run()
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)

        failed = sum(1 for row in report.rows if row.value == FAILED)
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(report)} rows to {runner.results_path}"))
        if failed:
            self.stdout.write(self.style.WARNING(f"{failed} metric values belong to failed cells"))
