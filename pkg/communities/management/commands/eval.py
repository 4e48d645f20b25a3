from communities.exceptions import CascadeCommunitiesError
from communities.graphs import load_partition_labels
from communities.metrics import METRICS, evaluate

from ._base import CascadeCommand


class Command(CascadeCommand):
    help = 'Compare a detected partition of the observed nodes with the ground truth'

    def add_arguments(self, parser):
        parser.add_argument('predicted', type=str, help='Detected communities (node<TAB>community)')
        parser.add_argument('truth', type=str, help='Ground-truth communities of every node')
        parser.add_argument('--metrics', type=str, default=','.join(METRICS),
                            help=f"Comma-separated subset of {', '.join(METRICS)}")

    def handle(self, *args, **options):
        metrics = self.parse_list(options['metrics'])
        unknown = [name for name in metrics if name not in METRICS]
        if unknown or not metrics:
            raise self.usage_error(f"unknown metric(s): {', '.join(unknown) or '(none given)'}")

        try:
            index, truth = load_partition_labels(options['truth'])
            _, predicted = load_partition_labels(options['predicted'], index, extend=False)
            values = evaluate(predicted, truth, metrics)
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)

        for name, value in values.items():
            if value is None:
                self.stdout.write(self.style.WARNING(f"{name}=undefined"))
            else:
                self.stdout.write(f"{name}={value:.6f}")
