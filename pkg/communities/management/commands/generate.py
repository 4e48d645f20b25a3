from communities.cascades import (
    CalibrationGoal, CascadeModel, EpidemicParams, calibrate, generate_cascades, preset_params,
    write_cascades, write_transmissions,
)
from communities.exceptions import CascadeCommunitiesError, ValidationError
from communities.graphs import load_communities, load_edge_list
from communities.services import relative_size

from ._base import CascadeCommand


class Command(CascadeCommand):
    help = 'Simulate cascades on a graph (SIR, SI-BD) or on a community structure (C-SI-BD)'

    def add_arguments(self, parser):
        parser.add_argument('edges', type=str, help='Edge list (u<TAB>v[<TAB>w])')
        parser.add_argument('output', type=str, help='Cascade file to write')
        parser.add_argument('--communities', type=str, help='Community file; required for c-si-bd')
        parser.add_argument('--transmissions', type=str, help='Also write who-infected-whom to this file')
        parser.add_argument('--model', choices=[m.value for m in CascadeModel], required=True)
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--beta', type=float, default=1.0)
        parser.add_argument('--alpha-in', type=float)
        parser.add_argument('--alpha-out', type=float)
        parser.add_argument('--lomax-shape', type=float, help='Lomax shape of the per-cascade rate factor (SIR)')
        parser.add_argument('--tmax', type=float, default=1.0, help='Observation horizon (SI-BD, C-SI-BD)')
        parser.add_argument('--num-cascades', type=int, required=True)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--calibrate', choices=[g.value for g in CalibrationGoal],
                            help='Pick the free rate by Monte Carlo instead of --alpha / --alpha-out')
        parser.add_argument('--preset', type=str, help='Use the published parameters of this dataset')
        parser.add_argument('--workers', type=int, default=1)

    def _params(self, options, model, target) -> EpidemicParams:
        if options['preset']:
            return preset_params(options['preset'], model)
        base = EpidemicParams(
            alpha=options['alpha'], beta=options['beta'], alpha_in=options['alpha_in'],
            alpha_out=options['alpha_out'], lomax_shape=options['lomax_shape'], t_max=options['tmax'],
        )
        if options['calibrate']:
            self.stdout.write(f"Calibrating {model.value} for {options['calibrate']}...")
            return calibrate(target, model, options['calibrate'], seed=options['seed'], base=base)
        return base.validate(model)

    def handle(self, *args, **options):
        model = CascadeModel(options['model'])
        if options['num_cascades'] < 0 or options['workers'] < 1:
            raise self.usage_error("--num-cascades must be >= 0 and --workers >= 1")
        if options['preset'] and options['calibrate']:
            raise self.usage_error("--preset and --calibrate are exclusive")
        if model is CascadeModel.C_SI_BD and not options['communities']:
            raise self.usage_error("c-si-bd needs --communities")

        try:
            graph = load_edge_list(options['edges'])
            truth = load_communities(options['communities'], graph) if options['communities'] else None
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)
        target = truth if model is CascadeModel.C_SI_BD else graph

        try:
            params = self._params(options, model, target)
        except ValidationError as exc:
            raise self.usage_error(exc)
        except CascadeCommunitiesError as exc:
            raise self.failure(exc)
        self.stdout.write(f"Parameters: {params.as_dict()}")

        try:
            cascade_set = generate_cascades(target, model, params, options['num_cascades'], options['seed'],
                                            workers=options['workers'], index=graph.index)
            write_cascades(cascade_set, options['output'])
            if options['transmissions']:
                write_transmissions(cascade_set, options['transmissions'])
        except (CascadeCommunitiesError, OSError) as exc:
            raise self.failure(exc)

        summary = f"mean size {cascade_set.mean_size():.3f}, singletons {cascade_set.singleton_fraction():.1%}"
        if graph.edge_count:
            summary += f", S={relative_size(cascade_set, graph):.4g}"
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(cascade_set)} cascades to {options['output']} ({summary})"
        ))
