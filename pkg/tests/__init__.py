"""Initialize tests package."""