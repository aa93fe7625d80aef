# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import gettext
import locale
import os
from .path_utils import get_resource_path
import logging
logger = logging.getLogger(__name__)

LANG_ENV_VAR = "STEFAN_LAB_LANG"


class LanguageManager:
    """gettext catalogue for user-facing messages (errors, check reasons)."""

    domain = "stefan_lab"
    default_lang = "en_US"

    def __init__(self, locale_dir=None):
        self.locale_dir = locale_dir or get_resource_path("locales")
        self.current_lang_code = self.default_lang
        self.translator = lambda s: s

    def requested_language(self):
        override = os.getenv(LANG_ENV_VAR)
        if override:
            return override
        try:
            system_lang, _encoding = locale.getlocale()
        except ValueError:
            system_lang = None
        if system_lang:
            return system_lang
        env_lang = os.getenv("LANG")
        if env_lang and env_lang not in ("C", "POSIX"):
            return env_lang.split(".")[0]
        return self.default_lang

    def setup_translation(self, lang_code=None):
        lang_code = (lang_code or self.requested_language()).replace("-", "_")
        candidates = [lang_code, lang_code.split("_")[0]]
        catalogue = gettext.translation(self.domain, localedir=self.locale_dir, languages=candidates, fallback=True)
        if type(catalogue) is gettext.NullTranslations:
            logger.debug(f"No message catalogue for '{lang_code}', using built-in English")
            self.current_lang_code = self.default_lang
        else:
            self.current_lang_code = lang_code
        self.translator = catalogue.gettext

    def get_translator(self):
        return self.translator


lang_manager = LanguageManager()
_ = lambda s: lang_manager.get_translator()(s)
