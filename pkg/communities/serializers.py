from rest_framework import serializers

from .cascades import CalibrationGoal, CascadeModel, EpidemicParams
from .conf import get_setting
from .exceptions import ValidationError as DomainValidationError
from .lfr import LfrConfig
from .metrics import METRICS
from .surrogates import SurrogateMethod

ALGORITHMS = [method.value for method in SurrogateMethod] + ['clustopt']
NETWORKX_DATASETS = ['karate']


class EpidemicParamsSerializer(serializers.Serializer):
    """Epidemic rates; which ones are required depends on the model"""
    alpha = serializers.FloatField(required=False, min_value=0)
    beta = serializers.FloatField(required=False, min_value=0, default=1.0)
    alpha_in = serializers.FloatField(required=False, min_value=0)
    alpha_out = serializers.FloatField(required=False, min_value=0)
    lomax_shape = serializers.FloatField(required=False, allow_null=True)
    t_max = serializers.FloatField(required=False, min_value=0, default=1.0)

    def create(self, validated_data):
        return EpidemicParams(**validated_data)


class LfrConfigSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=2)
    tau1 = serializers.FloatField(default=2.5)
    tau2 = serializers.FloatField(default=1.5)
    mu = serializers.FloatField(default=0.1, min_value=0, max_value=1)
    avg_degree = serializers.FloatField(default=5.0)
    max_degree = serializers.FloatField(default=100.0)
    min_community = serializers.IntegerField(default=100, min_value=1)
    max_community = serializers.IntegerField(default=600, min_value=1)
    seed = serializers.IntegerField(required=False, allow_null=True)

    def validate(self, attrs):
        try:
            LfrConfig(**attrs).validate()
        except DomainValidationError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        return LfrConfig(**validated_data)


class PlantedSerializer(serializers.Serializer):
    sizes = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    p_in = serializers.FloatField(min_value=0, max_value=1)
    p_out = serializers.FloatField(min_value=0, max_value=1)
    seed = serializers.IntegerField(default=0)


class DatasetSerializer(serializers.Serializer):
    """One dataset entry: files, a generator, or observed cascades with labels"""
    name = serializers.RegexField(r'^[A-Za-z0-9_.-]+$', max_length=100)
    edges = serializers.CharField(required=False)
    communities = serializers.CharField(required=False)
    cascades = serializers.CharField(required=False)
    transmissions = serializers.CharField(required=False)
    retweets = serializers.CharField(required=False)
    networkx = serializers.ChoiceField(choices=NETWORKX_DATASETS, required=False)
    planted = PlantedSerializer(required=False)
    lfr = LfrConfigSerializer(required=False)

    def validate(self, attrs):
        generators = [key for key in ('networkx', 'planted', 'lfr') if key in attrs]
        observed = [key for key in ('cascades', 'retweets') if key in attrs]
        if len(generators) + len(observed) > 1:
            raise serializers.ValidationError("give one of networkx, planted, lfr, cascades or retweets")
        if not generators and 'communities' not in attrs:
            raise serializers.ValidationError("a communities file is required")
        if not generators and not observed and 'edges' not in attrs:
            raise serializers.ValidationError("an edges file is required")
        if 'transmissions' in attrs and 'cascades' not in attrs:
            raise serializers.ValidationError("transmissions accompany a cascades file")
        return attrs

    @staticmethod
    def is_observed(entry) -> bool:
        return 'cascades' in entry or 'retweets' in entry


class ExperimentSpecSerializer(serializers.Serializer):
    """Validate a bench configuration before anything runs"""
    datasets = DatasetSerializer(many=True, allow_empty=False)
    model = serializers.ChoiceField(choices=[m.value for m in CascadeModel], required=False)
    params = EpidemicParamsSerializer(required=False)
    calibrate = serializers.ChoiceField(choices=[g.value for g in CalibrationGoal], required=False)
    preset = serializers.BooleanField(default=False)
    algorithms = serializers.ListField(child=serializers.ChoiceField(choices=ALGORITHMS), allow_empty=False)
    budgets = serializers.ListField(child=serializers.FloatField(min_value=0), allow_empty=False)
    budget_kind = serializers.ChoiceField(choices=['count', 'S'], default='count')
    metrics = serializers.ListField(
        child=serializers.ChoiceField(choices=list(METRICS)), allow_empty=False, default=list(METRICS),
    )
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False, default=[0])
    output = serializers.CharField()
    workers = serializers.IntegerField(min_value=1, required=False)
    plots = serializers.BooleanField(default=False)
    include_unobserved = serializers.BooleanField(default=True)

    def validate_algorithms(self, value):
        return list(dict.fromkeys(value))

    def validate(self, attrs):
        names = [entry['name'] for entry in attrs['datasets']]
        if len(set(names)) != len(names):
            raise serializers.ValidationError({'datasets': "dataset names must be unique"})
        if attrs['budget_kind'] == 'count' and any(b != int(b) or b < 1 for b in attrs['budgets']):
            raise serializers.ValidationError({'budgets': "cascade counts must be positive integers"})
        synthetic = [entry for entry in attrs['datasets'] if not DatasetSerializer.is_observed(entry)]
        if synthetic:
            if 'model' not in attrs:
                raise serializers.ValidationError({'model': "required for datasets without cascade files"})
            if attrs['preset'] and ('params' in attrs or 'calibrate' in attrs):
                raise serializers.ValidationError("preset excludes params and calibrate")
            if not (attrs['preset'] or 'params' in attrs or 'calibrate' in attrs):
                raise serializers.ValidationError("give params, calibrate or preset")
            # with calibrate, params only seed the rates calibration keeps
            if 'params' in attrs and 'calibrate' not in attrs:
                try:
                    EpidemicParams(**attrs['params']).validate(attrs['model'])
                except DomainValidationError as exc:
                    raise serializers.ValidationError({'params': str(exc)})
        attrs.setdefault('workers', get_setting('BENCH_WORKERS'))
        return attrs

    def create(self, validated_data):
        from .services import ExperimentSpec

        return ExperimentSpec.from_validated(validated_data)
