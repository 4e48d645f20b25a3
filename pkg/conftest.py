import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'cascade_communities.settings')
django.setup()
