from communities.exceptions import CascadeCommunitiesError
from communities.graphs import write_communities, write_edge_list
from communities.lfr import generate_lfr, realized_mixing
from communities.serializers import LfrConfigSerializer

from ._base import CascadeCommand


class Command(CascadeCommand):
    help = 'Generate an LFR benchmark graph and its planted communities'

    def add_arguments(self, parser):
        parser.add_argument('edges', type=str, help='Edge list to write')
        parser.add_argument('communities', type=str, help='Community file to write')
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--tau1', type=float, default=2.5, help='Degree exponent')
        parser.add_argument('--tau2', type=float, default=1.5, help='Community size exponent')
        parser.add_argument('--mu', type=float, default=0.1, help='Mixing parameter')
        parser.add_argument('--avg-degree', type=float, default=5.0)
        parser.add_argument('--max-degree', type=float, default=100.0)
        parser.add_argument('--min-community', type=int, default=100)
        parser.add_argument('--max-community', type=int, default=600)
        parser.add_argument('--seed', type=int)

    def handle(self, *args, **options):
        fields = ('n', 'tau1', 'tau2', 'mu', 'avg_degree', 'max_degree', 'min_community', 'max_community', 'seed')
        serializer = LfrConfigSerializer(data={key: options[key] for key in fields if options[key] is not None})
        if not serializer.is_valid():
            raise self.usage_error(serializer.errors)
        config = serializer.save()

        self.stdout.write(f"Generating LFR graph with n={config.n}, mu={config.mu:g}...")
        try:
            bundle = generate_lfr(config)
            write_edge_list(bundle.graph, options['edges'])
            write_communities(bundle.ground_truth, options['communities'], bundle.graph.index)
            mixing = realized_mixing(bundle.graph, bundle.ground_truth)
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)

        self.stdout.write(self.style.SUCCESS(
            f"Wrote {bundle.graph.edge_count} edges and {bundle.ground_truth.k} communities "
            f"(realized mixing {mixing:.3f})"
        ))
