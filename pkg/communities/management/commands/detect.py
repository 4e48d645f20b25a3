import argparse

from communities.cascades import read_cascades
from communities.clustopt import ClustOpt
from communities.exceptions import CascadeCommunitiesError
from communities.graphs import write_communities, write_edge_list
from communities.serializers import ALGORITHMS
from communities.surrogates import SurrogateMethod, build_surrogate, cluster_surrogate

from ._base import CascadeCommand


class Command(CascadeCommand):
    help = 'Detect communities from one cascade file with a surrogate method or ClustOpt'

    def add_arguments(self, parser):
        parser.add_argument('cascades', type=str, help='Cascade file (node:time;node:time per line)')
        parser.add_argument('output', type=str, help='Community file to write (node<TAB>community)')
        parser.add_argument('--method', choices=ALGORITHMS, required=True)
        parser.add_argument('--transmissions', type=str, help='Who-infected-whom file (needed by oracle)')
        parser.add_argument('--a', type=float, help='Explicit Clique decay; default 1 / mean pairwise gap')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--dump-surrogate', type=str, help='Write the surrogate graph as an edge list')
        parser.add_argument('--report-rates', action='store_true', help='Print the fitted ClustOpt rates')
        parser.add_argument('--include-unobserved', action=argparse.BooleanOptionalAction, default=True,
                            help='ClustOpt: count the survival of observed nodes a cascade missed')

    def handle(self, *args, **options):
        method = options['method']
        if options['a'] is not None and method != SurrogateMethod.CLIQUE.value:
            raise self.usage_error("--a only applies to --method clique")
        if options['a'] is not None and options['a'] < 0:
            raise self.usage_error("--a must be nonnegative")
        if options['dump_surrogate'] and method == 'clustopt':
            raise self.usage_error("--dump-surrogate needs a surrogate method")
        if options['report_rates'] and method != 'clustopt':
            raise self.usage_error("--report-rates only applies to --method clustopt")

        try:
            cascade_set = read_cascades(options['cascades'], transmissions_path=options['transmissions'])
            self.stdout.write(f"Read {len(cascade_set)} cascades over {len(cascade_set.observed_nodes())} nodes")
            if method == 'clustopt':
                runner = ClustOpt(cascade_set, seed=options['seed'],
                                  include_unobserved=options['include_unobserved'])
                partition = runner.run()
                if options['report_rates']:
                    self.stdout.write(runner.rates.report())
            else:
                surrogate = build_surrogate(cascade_set, method, options['a'])
                if options['dump_surrogate']:
                    write_edge_list(surrogate.graph, options['dump_surrogate'])
                    self.stdout.write(f"Surrogate graph written to {options['dump_surrogate']}")
                partition = cluster_surrogate(surrogate, seed=options['seed'])
            write_communities(partition, options['output'], cascade_set.index)
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)

        self.stdout.write(self.style.SUCCESS(
            f"Found {partition.k} communities on {len(partition)} nodes; wrote {options['output']}"
        ))
