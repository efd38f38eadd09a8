from django.apps import AppConfig


class CoexistappConfig(AppConfig):
    name = 'coexistApp'
    verbose_name = 'Radar / cellular coexistence'
